//! Near-fields and near-domains as finite double tables.
//!
//! A [`NearStructure`] carries addition and multiplication tables over the
//! labels `0..order`. Axiom checks scan the tables exhaustively and report
//! the lexicographically first witness of a failure.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{prime_power, FieldCtx};
use crate::perm::{FiniteGroup, Permutation};

/// Default cap on Dickson twists (`q = p²`).
pub const DICKSON_MAX_ORDER: u64 = 49;
/// Default cap on `p^k` when enumerating GL(k, p).
pub const LINEAR_MAX_ORDER: u64 = 16;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NearStructure {
    order: usize,
    add: Vec<usize>,
    mul: Vec<usize>,
    zero: usize,
    one: usize,
}

impl fmt::Debug for NearStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NearStructure")
            .field("order", &self.order)
            .field("zero", &self.zero)
            .field("one", &self.one)
            .finish_non_exhaustive()
    }
}

impl NearStructure {
    /// Validates shape, ranges, and the identity rows: `zero` is a two-sided
    /// additive identity, `one` a two-sided multiplicative identity, and
    /// multiplying by `zero` gives `zero`.
    pub fn new(
        order: usize,
        add: Vec<Vec<usize>>,
        mul: Vec<Vec<usize>>,
        zero: usize,
        one: usize,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::Precondition(msg));
        if order < 2 {
            return bad(format!("order {order} is too small"));
        }
        if zero >= order || one >= order || zero == one {
            return bad(format!("zero={zero}, one={one} invalid for order {order}"));
        }
        for (name, table) in [("add", &add), ("mul", &mul)] {
            if table.len() != order {
                return bad(format!(
                    "{name} table has {} rows, expected {order}",
                    table.len()
                ));
            }
            for (i, row) in table.iter().enumerate() {
                if row.len() != order {
                    return bad(format!(
                        "{name} row {i} has {} entries, expected {order}",
                        row.len()
                    ));
                }
                if let Some(v) = row.iter().find(|&&v| v >= order) {
                    return bad(format!("{name} row {i} has out-of-range entry {v}"));
                }
            }
        }
        for x in 0..order {
            if add[zero][x] != x || add[x][zero] != x {
                return bad(format!("{zero} is not an additive identity at {x}"));
            }
            if mul[one][x] != x || mul[x][one] != x {
                return bad(format!("{one} is not a multiplicative identity at {x}"));
            }
            if mul[zero][x] != zero || mul[x][zero] != zero {
                return bad(format!("multiplication by zero is not zero at {x}"));
            }
        }
        Ok(NearStructure {
            order,
            add: add.into_iter().flatten().collect(),
            mul: mul.into_iter().flatten().collect(),
            zero,
            one,
        })
    }

    fn from_fns(
        order: usize,
        zero: usize,
        one: usize,
        add: impl Fn(usize, usize) -> usize,
        mul: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        let a = (0..order)
            .map(|x| (0..order).map(|y| add(x, y)).collect())
            .collect();
        let m = (0..order)
            .map(|x| (0..order).map(|y| mul(x, y)).collect())
            .collect();
        NearStructure::new(order, a, m, zero, one)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn one(&self) -> usize {
        self.one
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.order + b]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    pub fn add_table(&self) -> Vec<Vec<usize>> {
        self.add.chunks(self.order).map(<[usize]>::to_vec).collect()
    }

    pub fn mul_table(&self) -> Vec<Vec<usize>> {
        self.mul.chunks(self.order).map(<[usize]>::to_vec).collect()
    }

    fn nonzero(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.order).filter(move |&x| x != self.zero)
    }

    /// Right inverse `-a`: the unique `b` with `a + b = 0`.
    pub fn neg(&self, a: usize) -> usize {
        (0..self.order)
            .find(|&b| self.add(a, b) == self.zero)
            .expect("loop has right inverses")
    }

    pub fn is_additively_commutative(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.add(a, b) == self.add(b, a)))
    }

    pub fn is_additively_associative(&self) -> bool {
        self.first_add_assoc_failure().is_none()
    }

    pub fn is_multiplicatively_commutative(&self) -> bool {
        self.nonzero()
            .all(|a| self.nonzero().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Elements of multiplicative order two.
    pub fn multiplicative_involutions(&self) -> Vec<usize> {
        self.nonzero()
            .filter(|&a| a != self.one && self.mul(a, a) == self.one)
            .collect()
    }

    fn first_add_assoc_failure(&self) -> Option<Vec<usize>> {
        let n = self.order;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                        return Some(vec![a, b, c]);
                    }
                }
            }
        }
        None
    }

    fn check_multiplicative_group(&self) -> Verdict {
        for a in self.nonzero() {
            for b in self.nonzero() {
                if self.mul(a, b) == self.zero {
                    return fail(Axiom::MultiplicativeClosure, vec![a, b]);
                }
            }
        }
        for a in self.nonzero() {
            for b in self.nonzero() {
                for c in self.nonzero() {
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return fail(Axiom::MultiplicativeAssociativity, vec![a, b, c]);
                    }
                }
            }
        }
        for a in self.nonzero() {
            if !self
                .nonzero()
                .any(|b| self.mul(a, b) == self.one && self.mul(b, a) == self.one)
            {
                return fail(Axiom::MultiplicativeInverse, vec![a]);
            }
        }
        Ok(())
    }

    fn check_right_distributivity(&self) -> Verdict {
        let n = self.order;
        for a in 0..n {
            for b in 0..n {
                for c in self.nonzero() {
                    let lhs = self.mul(self.add(a, b), c);
                    let rhs = self.add(self.mul(a, c), self.mul(b, c));
                    if lhs != rhs {
                        return fail(Axiom::RightDistributivity, vec![a, b, c]);
                    }
                }
            }
        }
        Ok(())
    }

    fn check_loop(&self) -> Verdict {
        let n = self.order;
        for a in 0..n {
            let mut row = vec![false; n];
            let mut col = vec![false; n];
            for b in 0..n {
                let r = self.add(a, b);
                let c = self.add(b, a);
                if row[r] || col[c] {
                    return fail(Axiom::LoopDivision, vec![a, b]);
                }
                row[r] = true;
                col[c] = true;
            }
        }
        Ok(())
    }
}

/// Axioms named in failure reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    AdditiveAssociativity,
    AdditiveInverse,
    LoopDivision,
    MultiplicativeClosure,
    MultiplicativeAssociativity,
    MultiplicativeInverse,
    RightDistributivity,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::AdditiveAssociativity => "additive associativity",
            Axiom::AdditiveInverse => "additive inverse",
            Axiom::LoopDivision => "loop division",
            Axiom::MultiplicativeClosure => "multiplicative closure",
            Axiom::MultiplicativeAssociativity => "multiplicative associativity",
            Axiom::MultiplicativeInverse => "multiplicative inverse",
            Axiom::RightDistributivity => "right distributivity",
        }
    }
}

/// A failed axiom together with the first offending tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomFailure {
    pub axiom: Axiom,
    pub witness: Vec<usize>,
}

impl fmt::Display for AxiomFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.witness.iter().map(usize::to_string).collect();
        write!(f, "{} fails at ({})", self.axiom.name(), w.join(", "))
    }
}

pub type Verdict = std::result::Result<(), AxiomFailure>;

fn fail(axiom: Axiom, witness: Vec<usize>) -> Verdict {
    Err(AxiomFailure { axiom, witness })
}

/// (Q,+) a group with identity 0, (Q∖{0},·) a group with identity 1, and
/// `(a+b)·c = a·c + b·c` for all `a, b` and `c ≠ 0`.
pub fn verify_near_field(s: &NearStructure) -> Verdict {
    if let Some(w) = s.first_add_assoc_failure() {
        return fail(Axiom::AdditiveAssociativity, w);
    }
    for a in 0..s.order {
        if !(0..s.order).any(|b| s.add(a, b) == s.zero && s.add(b, a) == s.zero) {
            return fail(Axiom::AdditiveInverse, vec![a]);
        }
    }
    s.check_multiplicative_group()?;
    s.check_right_distributivity()
}

/// Outcome of a near-domain scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NearDomainReport {
    pub verdict: Verdict,
    pub additive_associative: bool,
}

impl NearDomainReport {
    pub fn is_near_domain(&self) -> bool {
        self.verdict.is_ok()
    }

    /// A near-domain is a near-field exactly when its addition associates.
    pub fn is_near_field(&self) -> bool {
        self.verdict.is_ok() && self.additive_associative
    }
}

/// (D∖{0},·) a group, (D,+) a loop with identity 0, right distributivity.
pub fn verify_near_domain(s: &NearStructure) -> NearDomainReport {
    let verdict = s
        .check_multiplicative_group()
        .and_then(|_| s.check_loop())
        .and_then(|_| s.check_right_distributivity());
    NearDomainReport {
        verdict,
        additive_associative: s.is_additively_associative(),
    }
}

/// The tables of GF(q); zero is 0 and one is 1.
pub fn build_field_nearfield(q: u64) -> Result<NearStructure> {
    let f = FieldCtx::new(q)?;
    field_tables(&f)
}

pub fn field_tables(f: &FieldCtx) -> Result<NearStructure> {
    NearStructure::from_fns(f.order(), 0, 1, |a, b| f.add(a, b), |a, b| f.mul(a, b))
}

/// Dickson twist of GF(p²): `a·b = a*b` when `b` is a square and
/// `a^p * b` otherwise. The result is verified before it is returned.
pub fn build_dickson_nearfield(q: u64) -> Result<NearStructure> {
    build_dickson_nearfield_capped(q, DICKSON_MAX_ORDER)
}

pub fn build_dickson_nearfield_capped(q: u64, cap: u64) -> Result<NearStructure> {
    let (p, k) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
    if k != 2 || p == 2 {
        return Err(Error::Unsupported(format!(
            "Dickson twist needs q = p^2 with p odd, got {q}"
        )));
    }
    if q > cap {
        return Err(Error::Unsupported(format!("q = {q} exceeds the cap {cap}")));
    }
    let f = FieldCtx::new(q)?;
    let square: Vec<bool> = (0..f.order()).map(|b| f.is_square(b)).collect();
    let s = NearStructure::from_fns(
        f.order(),
        0,
        1,
        |a, b| f.add(a, b),
        |a, b| {
            if square[b] {
                f.mul(a, b)
            } else {
                f.mul(f.frobenius(a), b)
            }
        },
    )?;
    verify_near_field(&s).map_err(|e| Error::Axiom(e.to_string()))?;
    Ok(s)
}

/// The group of maps `x ↦ x·a + b` (`a ≠ 0`), which is sharply 2-transitive
/// on the carrier. Multiplying on the right keeps the maps closed under
/// composition for right near-fields.
pub fn build_affine_group(s: &NearStructure) -> Result<FiniteGroup> {
    verify_near_field(s).map_err(|e| Error::Axiom(e.to_string()))?;
    let n = s.order();
    let mut elements = Vec::with_capacity(n * (n - 1));
    for a in s.nonzero() {
        for b in 0..n {
            let images = (0..n).map(|x| s.add(s.mul(x, a), b)).collect();
            elements.push(Permutation::new(images)?);
        }
    }
    let g = FiniteGroup::from_elements(n, elements)?;
    if g.order() != n * (n - 1) || !g.is_sharply_n_transitive(2)? {
        return Err(Error::Integrity(format!(
            "affine group of order {} is not sharply 2-transitive",
            g.order()
        )));
    }
    Ok(g)
}

/// How to read addition off the translations `ρ_b ∈ tJ` (with `zero^ρ_b = b`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AddOrientation {
    /// `a + b := a^(ρ_b)`
    MoveLeft,
    /// `a + b := b^(ρ_a)`
    MoveRight,
}

/// How to read multiplication off the stabilizer elements `g_a` (with
/// `one^g_a = a`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MulOrientation {
    /// `a · b := a^(g_b)`
    MoveLeft,
    /// `a · b := b^(g_a)`
    MoveRight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Orientation {
    pub add: AddOrientation,
    pub mul: MulOrientation,
}

impl Orientation {
    pub const CANONICAL: Orientation = Orientation {
        add: AddOrientation::MoveLeft,
        mul: MulOrientation::MoveLeft,
    };

    /// All four variants, canonical first.
    pub const ALL: [Orientation; 4] = [
        Orientation::CANONICAL,
        Orientation {
            add: AddOrientation::MoveRight,
            mul: MulOrientation::MoveLeft,
        },
        Orientation {
            add: AddOrientation::MoveLeft,
            mul: MulOrientation::MoveRight,
        },
        Orientation {
            add: AddOrientation::MoveRight,
            mul: MulOrientation::MoveRight,
        },
    ];

    pub fn name(self) -> &'static str {
        match (self.add, self.mul) {
            (AddOrientation::MoveLeft, MulOrientation::MoveLeft) => "canonical",
            (AddOrientation::MoveRight, MulOrientation::MoveLeft) => "swap-add",
            (AddOrientation::MoveLeft, MulOrientation::MoveRight) => "swap-mul",
            (AddOrientation::MoveRight, MulOrientation::MoveRight) => "swap-both",
        }
    }

    pub fn from_name(name: &str) -> Option<Orientation> {
        Orientation::ALL.into_iter().find(|o| o.name() == name)
    }
}

/// Reads the near-domain of a sharply 2-transitive group off the point set.
///
/// `t` is the involution swapping `zero` and `one`; `tJ` acts regularly, and
/// its element `ρ_b` sending `zero` to `b` plays the role of "add `b`". The
/// stabilizer of `zero` acts regularly on the other points, and its element
/// `g_a` sending `one` to `a` plays the role of "multiply by `a`".
pub fn extract_near_domain(
    g: &FiniteGroup,
    zero: usize,
    one: usize,
    orientation: Orientation,
) -> Result<NearStructure> {
    let s = extract_tables(g, zero, one, orientation)?;
    verify_near_domain(&s)
        .verdict
        .map_err(|e| Error::Axiom(format!("{} orientation: {e}", orientation.name())))?;
    Ok(s)
}

/// Tries every orientation, canonical first, and returns the first whose
/// tables pass the near-domain check.
pub fn extract_near_domain_any(
    g: &FiniteGroup,
    zero: usize,
    one: usize,
) -> Result<(Orientation, NearStructure)> {
    let mut failures = Vec::new();
    for o in Orientation::ALL {
        match extract_near_domain(g, zero, one, o) {
            Ok(s) => return Ok((o, s)),
            Err(e @ Error::Axiom(_)) => failures.push(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Axiom(failures.join("; ")))
}

fn extract_tables(
    g: &FiniteGroup,
    zero: usize,
    one: usize,
    orientation: Orientation,
) -> Result<NearStructure> {
    let n = g.degree();
    if zero >= n || one >= n || zero == one {
        return Err(Error::Precondition(format!(
            "zero={zero}, one={one} must be distinct points below {n}"
        )));
    }
    if !g.is_sharply_n_transitive(2)? {
        return Err(Error::NotSharplyTransitive(2));
    }
    let t = g
        .elements()
        .iter()
        .find(|e| e.image(zero) == one && e.image(one) == zero)
        .expect("2-transitive")
        .clone();
    let mut rho: Vec<Option<Permutation>> = vec![None; n];
    for r in crate::analysis::translation_set(g, &t)? {
        let slot = &mut rho[r.image(zero)];
        if slot.is_some() {
            return Err(Error::Integrity("tJ does not act regularly".into()));
        }
        *slot = Some(r);
    }
    let rho: Vec<Permutation> = rho
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Integrity("tJ does not reach every point".into()))?;
    let mut mult: Vec<Option<Permutation>> = vec![None; n];
    for e in g.elements().iter().filter(|e| e.image(zero) == zero) {
        mult[e.image(one)] = Some(e.clone());
    }
    let add = |a: usize, b: usize| match orientation.add {
        AddOrientation::MoveLeft => rho[b].image(a),
        AddOrientation::MoveRight => rho[a].image(b),
    };
    let mul = |a: usize, b: usize| {
        if a == zero || b == zero {
            return zero;
        }
        match orientation.mul {
            MulOrientation::MoveLeft => mult[b].as_ref().expect("regular stabilizer").image(a),
            MulOrientation::MoveRight => mult[a].as_ref().expect("regular stabilizer").image(b),
        }
    };
    NearStructure::from_fns(n, zero, one, add, mul)
}

/// Bijection `f` with `f(s.zero) = t.zero`, `f(s.one) = t.one` carrying both
/// tables of `s` onto those of `t`, found by backtracking.
pub fn find_isomorphism(s: &NearStructure, t: &NearStructure) -> Option<Vec<usize>> {
    let n = s.order();
    if n != t.order() {
        return None;
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    map[s.zero] = t.zero;
    map[s.one] = t.one;
    used[t.zero] = true;
    used[t.one] = true;
    let order: Vec<usize> = [s.zero, s.one]
        .into_iter()
        .chain((0..n).filter(|&x| x != s.zero && x != s.one))
        .collect();
    if !consistent(s, t, &map) {
        return None;
    }
    if extend_iso(s, t, &order, 2, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

fn consistent(s: &NearStructure, t: &NearStructure, map: &[usize]) -> bool {
    let n = s.order();
    for a in 0..n {
        if map[a] == usize::MAX {
            continue;
        }
        for b in 0..n {
            if map[b] == usize::MAX {
                continue;
            }
            for (sv, tv) in [
                (s.add(a, b), t.add(map[a], map[b])),
                (s.mul(a, b), t.mul(map[a], map[b])),
            ] {
                if map[sv] != usize::MAX && map[sv] != tv {
                    return false;
                }
            }
        }
    }
    true
}

fn extend_iso(
    s: &NearStructure,
    t: &NearStructure,
    order: &[usize],
    depth: usize,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    if depth == order.len() {
        return true;
    }
    let x = order[depth];
    for y in 0..t.order() {
        if used[y] {
            continue;
        }
        map[x] = y;
        used[y] = true;
        if consistent(s, t, map) && extend_iso(s, t, order, depth + 1, map, used) {
            return true;
        }
        map[x] = usize::MAX;
        used[y] = false;
    }
    false
}

pub fn is_isomorphic(s: &NearStructure, t: &NearStructure) -> bool {
    find_isomorphism(s, t).is_some()
}

/// A subgroup of GL(k, p) acting regularly on the nonzero vectors, with the
/// near-field it induces.
#[derive(Clone, Debug)]
pub struct RegularLinearGroup {
    /// The subgroup as permutations of the `p^k` vectors (vector index is
    /// the base-`p` reading of its coordinates).
    pub group: FiniteGroup,
    /// Number of GL(k, p)-conjugates of the subgroup.
    pub class_size: usize,
    pub near_field: NearStructure,
}

/// GL(k, p) acting on row vectors from the right, as permutations of the
/// `p^k` vectors.
pub fn general_linear_group(p: u32, k: u32) -> Result<FiniteGroup> {
    let elements = general_linear_elements(p, k)?;
    let q = (p as usize).pow(k);
    FiniteGroup::from_elements(q, elements)
}

fn general_linear_elements(p: u32, k: u32) -> Result<Vec<Permutation>> {
    let q = (p as u64).pow(k);
    if q > LINEAR_MAX_ORDER {
        return Err(Error::Unsupported(format!(
            "p^k = {q} exceeds the cap {LINEAR_MAX_ORDER}"
        )));
    }
    let q = q as usize;
    let (p, k) = (p as usize, k as usize);
    let digits = |mut v: usize| -> Vec<usize> {
        (0..k)
            .map(|_| {
                let d = v % p;
                v /= p;
                d
            })
            .collect()
    };
    let undigits = |d: &[usize]| d.iter().rev().fold(0, |acc, &x| acc * p + x);
    let mut out = Vec::new();
    // A matrix is the list of images of the k basis vectors.
    let total = q.pow(k as u32);
    for code in 0..total {
        let mut rest = code;
        let rows: Vec<Vec<usize>> = (0..k)
            .map(|_| {
                let r = rest % q;
                rest /= q;
                digits(r)
            })
            .collect();
        let images: Vec<usize> = (0..q)
            .map(|v| {
                let c = digits(v);
                let mut acc = vec![0; k];
                for (i, ci) in c.iter().enumerate() {
                    for j in 0..k {
                        acc[j] = (acc[j] + ci * rows[i][j]) % p;
                    }
                }
                undigits(&acc)
            })
            .collect();
        if let Ok(perm) = Permutation::new(images) {
            out.push(perm);
        }
    }
    Ok(out)
}

/// All subgroups of GL(k, p) of order `p^k − 1` acting regularly on the
/// nonzero vectors, one representative per GL(k, p)-conjugacy class.
///
/// Such a subgroup only contains elements without nonzero fixed vectors, and
/// so does every subgroup of it. The search grows semiregular subgroups one
/// generator at a time from cyclic ones, which reaches every such subgroup.
pub fn classify_regular_linear_groups(p: u32, k: u32) -> Result<Vec<RegularLinearGroup>> {
    let gl = general_linear_elements(p, k)?;
    let q = (p as usize).pow(k);
    let m = q - 1;
    let index: HashMap<&Permutation, usize> = gl.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let fixed_point_free: Vec<bool> = gl.iter().map(|g| (1..q).all(|v| g.image(v) != v)).collect();
    let semiregular_closure = |gens: &[usize]| -> Option<BTreeSet<usize>> {
        let mut set = BTreeSet::from([index[&Permutation::identity(q)]]);
        let mut frontier = vec![index[&Permutation::identity(q)]];
        while let Some(e) = frontier.pop() {
            for &g in gens {
                let h = index[&gl[e].then(&gl[g])];
                if set.insert(h) {
                    if !fixed_point_free[h] && !gl[h].is_identity() {
                        return None;
                    }
                    if set.len() > m {
                        return None;
                    }
                    frontier.push(h);
                }
            }
        }
        Some(set)
    };
    let candidates: Vec<usize> = (0..gl.len()).filter(|&i| fixed_point_free[i]).collect();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut layer: Vec<(Vec<usize>, BTreeSet<usize>)> = Vec::new();
    for &g in &candidates {
        if let Some(set) = semiregular_closure(&[g]) {
            let key: Vec<usize> = set.iter().copied().collect();
            if seen.insert(key) {
                layer.push((vec![g], set));
            }
        }
    }
    let mut regular: Vec<BTreeSet<usize>> = Vec::new();
    while !layer.is_empty() {
        let mut next = Vec::new();
        for (gens, set) in &layer {
            if set.len() == m {
                regular.push(set.clone());
                continue;
            }
            for &g in &candidates {
                if set.contains(&g) {
                    continue;
                }
                let mut more = gens.clone();
                more.push(g);
                if let Some(bigger) = semiregular_closure(&more) {
                    let key: Vec<usize> = bigger.iter().copied().collect();
                    if seen.insert(key) {
                        next.push((more, bigger));
                    }
                }
            }
        }
        layer = next;
    }
    regular.sort();
    let mut classified: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for h in &regular {
        let key: Vec<usize> = h.iter().copied().collect();
        if classified.contains(&key) {
            continue;
        }
        let mut class: BTreeSet<Vec<usize>> = BTreeSet::new();
        for x in &gl {
            let mut conj: Vec<usize> = h.iter().map(|&e| index[&gl[e].conjugate_by(x)]).collect();
            conj.sort_unstable();
            class.insert(conj);
        }
        let class_size = class.len();
        classified.extend(class);
        let elements: Vec<Permutation> = h.iter().map(|&e| gl[e].clone()).collect();
        let group = FiniteGroup::from_elements(q, elements)?;
        let near_field = near_field_from_regular_group(&group, p)?;
        out.push(RegularLinearGroup {
            group,
            class_size,
            near_field,
        });
    }
    Ok(out)
}

/// Near-field on the vectors: addition is vector addition, and `a · b` is
/// the image of `a` under the unique element of `h` carrying the first basis
/// vector to `b`.
pub fn near_field_from_regular_group(h: &FiniteGroup, p: u32) -> Result<NearStructure> {
    let q = h.degree();
    let k = prime_power(q as u64).map(|(_, k)| k).unwrap_or(1) as usize;
    let p = p as usize;
    let digits = |mut v: usize| -> Vec<usize> {
        (0..k)
            .map(|_| {
                let d = v % p;
                v /= p;
                d
            })
            .collect()
    };
    let vec_add = |a: usize, b: usize| {
        let (da, db) = (digits(a), digits(b));
        da.iter()
            .zip(&db)
            .rev()
            .fold(0, |acc, (x, y)| acc * p + (x + y) % p)
    };
    let one = 1;
    let mut by_image: Vec<Option<&Permutation>> = vec![None; q];
    for e in h.elements() {
        by_image[e.image(one)] = Some(e);
    }
    if by_image[1..].iter().any(Option::is_none) {
        return Err(Error::Precondition(
            "group is not regular on nonzero vectors".into(),
        ));
    }
    let s = NearStructure::from_fns(q, 0, one, vec_add, |a, b| {
        if b == 0 {
            0
        } else {
            by_image[b].expect("checked").image(a)
        }
    })?;
    verify_near_field(&s).map_err(|e| Error::Axiom(e.to_string()))?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::catalog;

    fn gf9() -> FieldCtx {
        FieldCtx::new(9).unwrap()
    }

    #[test]
    fn field_nearfields_pass() {
        for q in [2, 3, 4, 5, 7, 8, 9] {
            let s = build_field_nearfield(q).unwrap();
            assert_eq!(verify_near_field(&s), Ok(()), "GF({q})");
            assert!(s.is_additively_commutative());
        }
        assert!(build_field_nearfield(6).is_err());
    }

    #[test]
    fn gf9_multiplicative_group_is_cyclic() {
        let s = build_field_nearfield(9).unwrap();
        let orders: Vec<usize> = (1..9)
            .map(|a| {
                let mut x = a;
                let mut k = 1;
                while x != 1 {
                    x = s.mul(x, a);
                    k += 1;
                }
                k
            })
            .collect();
        assert!(orders.contains(&8));
    }

    #[test]
    fn dickson_examples() {
        let f = gf9();
        let d = build_dickson_nearfield(9).unwrap();
        let i = f.index_of(&[0, 1]);
        let two = f.index_of(&[2, 0]);
        assert_eq!(d.mul(i, two), f.index_of(&[0, 2]));
        assert_eq!(d.mul(i, f.index_of(&[1, 1])), f.index_of(&[1, 2]));
        assert!(!d.is_multiplicatively_commutative());
        assert_eq!(d.multiplicative_involutions(), vec![two]);
    }

    #[test]
    fn dickson_twist_orders() {
        for q in [9, 25, 49] {
            let d = build_dickson_nearfield(q).unwrap();
            assert!(verify_near_field(&d).is_ok());
            assert!(!d.is_multiplicatively_commutative());
        }
        assert!(build_dickson_nearfield(8).is_err());
        assert!(build_dickson_nearfield(27).is_err());
        assert!(build_dickson_nearfield(121).is_err());
    }

    #[test]
    fn left_twist_breaks_distributivity() {
        let f = gf9();
        let s = NearStructure::from_fns(
            9,
            0,
            1,
            |a, b| f.add(a, b),
            |a, b| {
                if f.is_square(a) {
                    f.mul(a, b)
                } else {
                    f.mul(a, f.frobenius(b))
                }
            },
        )
        .unwrap();
        let err = verify_near_field(&s).unwrap_err();
        assert_eq!(err.axiom, Axiom::RightDistributivity);
        let [a, b, c] = err.witness[..] else { panic!() };
        assert_ne!(s.mul(s.add(a, b), c), s.add(s.mul(a, c), s.mul(b, c)));
    }

    fn broken_loop() -> NearStructure {
        let add = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let f = FieldCtx::new(5).unwrap();
        let mul = (0..5)
            .map(|a| (0..5).map(|b| f.mul(a, b)).collect())
            .collect();
        NearStructure::new(5, add, mul, 0, 1).unwrap()
    }

    #[test]
    fn near_domain_examples() {
        let d = verify_near_domain(&build_dickson_nearfield(9).unwrap());
        assert!(d.is_near_domain() && d.is_near_field());
        let r = verify_near_domain(&broken_loop());
        assert_eq!(r.verdict.unwrap_err().axiom, Axiom::RightDistributivity);
        assert!(!r.additive_associative);
        let g4 = verify_near_domain(&build_field_nearfield(4).unwrap());
        assert!(g4.is_near_field());
    }

    #[test]
    fn constructor_rejects_bad_tables() {
        let s = build_field_nearfield(3).unwrap();
        let mut add = s.add_table();
        add[1].pop();
        assert!(NearStructure::new(3, add, s.mul_table(), 0, 1).is_err());
        assert!(NearStructure::new(3, s.add_table(), s.mul_table(), 1, 1).is_err());
        let mut mul = s.mul_table();
        mul[2][1] = 0;
        assert!(NearStructure::new(3, s.add_table(), mul, 0, 1).is_err());
    }

    #[test]
    fn affine_groups() {
        let g3 = build_affine_group(&build_field_nearfield(3).unwrap()).unwrap();
        assert_eq!(g3, catalog("S(3)").unwrap());
        let g4 = build_affine_group(&build_field_nearfield(4).unwrap()).unwrap();
        assert_eq!(g4, catalog("A(4)").unwrap());
        let d9 = build_affine_group(&build_dickson_nearfield(9).unwrap()).unwrap();
        assert_eq!(d9.order(), 72);
        assert!(d9.is_sharply_n_transitive(2).unwrap());
        assert!(build_affine_group(&broken_loop()).is_err());
    }

    #[test]
    fn one_point_stabilizer_is_regular() {
        let g = build_affine_group(&build_field_nearfield(5).unwrap()).unwrap();
        for x in 0..5 {
            let rest: Vec<usize> = (0..5).filter(|&y| y != x).collect();
            let st = g.stabilizer(&[x]).unwrap().restrict(&rest).unwrap();
            assert!(st.is_sharply_n_transitive(1).unwrap());
        }
    }

    #[test]
    fn extraction_recovers_fields() {
        for q in [3, 4, 5, 7] {
            let s = build_field_nearfield(q).unwrap();
            let g = build_affine_group(&s).unwrap();
            for o in Orientation::ALL {
                let e = extract_near_domain(&g, 0, 1, o).unwrap();
                assert!(is_isomorphic(&e, &s), "q={q} {o:?}");
            }
        }
        let a4 = catalog("A(4)").unwrap();
        let e = extract_near_domain(&a4, 0, 1, Orientation::CANONICAL).unwrap();
        assert!(is_isomorphic(&e, &build_field_nearfield(4).unwrap()));
    }

    #[test]
    fn extraction_recovers_dickson() {
        let d = build_dickson_nearfield(9).unwrap();
        let g = build_affine_group(&d).unwrap();
        let e = extract_near_domain(&g, 0, 1, Orientation::CANONICAL).unwrap();
        assert!(!e.is_multiplicatively_commutative());
        assert!(is_isomorphic(&e, &d));
        // Reading multiplication the other way round yields the opposite
        // structure, which is left- rather than right-distributive.
        let opposite = Orientation {
            add: AddOrientation::MoveLeft,
            mul: MulOrientation::MoveRight,
        };
        assert!(matches!(
            extract_near_domain(&g, 0, 1, opposite),
            Err(Error::Axiom(_))
        ));
        let (o, _) = extract_near_domain_any(&g, 0, 1).unwrap();
        assert_eq!(o, Orientation::CANONICAL);
    }

    #[test]
    fn extraction_rejects_non_sharp_groups() {
        let s4 = catalog("S(4)").unwrap();
        assert_eq!(
            extract_near_domain(&s4, 0, 1, Orientation::CANONICAL),
            Err(Error::NotSharplyTransitive(2))
        );
        let s3 = catalog("S(3)").unwrap();
        assert!(extract_near_domain(&s3, 1, 1, Orientation::CANONICAL).is_err());
    }

    #[test]
    fn isomorphism_search() {
        let a = build_field_nearfield(9).unwrap();
        let d = build_dickson_nearfield(9).unwrap();
        assert!(!is_isomorphic(&a, &d));
        assert!(is_isomorphic(&d, &d));
        // relabel GF(5) by x -> 4 - x ... keeping 0 and 1 would be needed, so
        // swap the labels 2 and 3 instead.
        let s = build_field_nearfield(5).unwrap();
        let sw = |x: usize| match x {
            2 => 3,
            3 => 2,
            x => x,
        };
        let relabelled = NearStructure::from_fns(
            5,
            0,
            1,
            |a, b| sw(s.add(sw(a), sw(b))),
            |a, b| sw(s.mul(sw(a), sw(b))),
        )
        .unwrap();
        let iso = find_isomorphism(&s, &relabelled).unwrap();
        assert_eq!(iso, vec![0, 1, 3, 2, 4]);
    }

    #[test]
    fn regular_linear_groups() {
        let c22 = classify_regular_linear_groups(2, 2).unwrap();
        assert_eq!(c22.len(), 1);
        let c51 = classify_regular_linear_groups(5, 1).unwrap();
        assert_eq!(c51.len(), 1);
        assert!(classify_regular_linear_groups(17, 1).is_err());
    }

    #[test]
    fn general_linear_orders() {
        assert_eq!(general_linear_group(2, 2).unwrap().order(), 6);
        assert_eq!(general_linear_group(3, 2).unwrap().order(), 48);
        assert_eq!(general_linear_group(5, 1).unwrap().order(), 4);
    }
}
