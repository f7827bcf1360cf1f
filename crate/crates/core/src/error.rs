use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("closure exceeded cap of {cap} elements (partial size {partial})")]
    CapExceeded { cap: usize, partial: usize },

    #[error("tuple length {n} exceeds degree {degree}")]
    TupleTooLong { n: usize, degree: usize },

    #[error("point {point} out of range for degree {degree}")]
    PointOutOfRange { point: usize, degree: usize },

    #[error("element is not a member of the group")]
    NotInGroup,

    #[error("unknown catalog group `{0}`")]
    UnknownGroup(String),

    #[error("order validation failed for {name}: expected {expected}, got {actual}")]
    OrderMismatch {
        name: String,
        expected: usize,
        actual: usize,
    },

    #[error("{0} is not a prime power")]
    NotPrimePower(u64),

    #[error("inverse of zero")]
    DivisionByZero,

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("axiom check failed: {0}")]
    Axiom(String),

    #[error("group is not sharply {0}-transitive")]
    NotSharplyTransitive(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("characteristic 2 case: {0}")]
    CharacteristicTwo(String),

    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("pair queue is empty")]
    QueueEmpty,
}

pub type Result<T> = std::result::Result<T, Error>;
