//! Sharply n-transitive permutation groups: finite groups by closure,
//! near-fields and near-domains, involution invariants, free-product normal
//! forms, a staged partial-action construction, and PGL(2, q).

pub mod analysis;
pub mod error;
pub mod field;
pub mod free_product;
pub mod io;
pub mod nearfield;
pub mod partial_action;
pub mod perm;
pub mod projective;

pub use error::{Error, Result};
