//! PGL(2, q) on the projective line and the Kerby condition on finite
//! near-domains.
//!
//! Affine points `u ∈ GF(q)` are numbered by their field index and `∞` is
//! point `q`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::nearfield::{build_affine_group, field_tables, verify_near_domain, NearStructure};
use crate::perm::{FiniteGroup, Permutation};

pub const PGL_MAX_ORDER: u64 = 16;

/// A point `(u : v)`, normalized to `v = 1`, or `(1 : 0)` for `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectivePoint {
    pub u: usize,
    pub v: usize,
}

impl ProjectivePoint {
    pub fn affine(u: usize) -> Self {
        ProjectivePoint { u, v: 1 }
    }

    pub fn infinity() -> Self {
        ProjectivePoint { u: 1, v: 0 }
    }

    pub fn is_infinity(&self) -> bool {
        self.v == 0
    }

    /// Normalizes a nonzero homogeneous pair.
    pub fn from_homogeneous(f: &FieldCtx, u: usize, v: usize) -> Result<Self> {
        if v != 0 {
            Ok(Self::affine(f.mul(u, f.inv(v)?)))
        } else if u != 0 {
            Ok(Self::infinity())
        } else {
            Err(Error::Precondition(
                "(0 : 0) is not a projective point".into(),
            ))
        }
    }

    /// Point number: the field index, or `q` for `∞`.
    pub fn index(&self, f: &FieldCtx) -> usize {
        if self.is_infinity() {
            f.order()
        } else {
            self.u
        }
    }

    pub fn from_index(f: &FieldCtx, i: usize) -> Self {
        if i == f.order() {
            Self::infinity()
        } else {
            Self::affine(i)
        }
    }
}

/// `x ↦ (a·x + b)/(c·x + d)`, scaled so the first nonzero entry is 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MoebiusMap {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl MoebiusMap {
    pub fn new(f: &FieldCtx, a: usize, b: usize, c: usize, d: usize) -> Result<Self> {
        if f.sub(f.mul(a, d), f.mul(b, c)) == 0 {
            return Err(Error::Precondition("determinant is zero".into()));
        }
        let lead = [a, b, c, d]
            .into_iter()
            .find(|&e| e != 0)
            .expect("nonzero determinant");
        let s = f.inv(lead)?;
        Ok(MoebiusMap {
            a: f.mul(a, s),
            b: f.mul(b, s),
            c: f.mul(c, s),
            d: f.mul(d, s),
        })
    }

    pub fn identity() -> Self {
        MoebiusMap {
            a: 1,
            b: 0,
            c: 0,
            d: 1,
        }
    }

    /// The permutation of the `q + 1` points.
    pub fn permutation(&self, f: &FieldCtx) -> Result<Permutation> {
        let images = (0..=f.order())
            .map(|i| Ok(apply_moebius(f, self, ProjectivePoint::from_index(f, i))?.index(f)))
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(images)
    }
}

/// `(u : v) ↦ (a·u + b·v : c·u + d·v)`.
pub fn apply_moebius(f: &FieldCtx, m: &MoebiusMap, x: ProjectivePoint) -> Result<ProjectivePoint> {
    let u = f.add(f.mul(m.a, x.u), f.mul(m.b, x.v));
    let v = f.add(f.mul(m.c, x.u), f.mul(m.d, x.v));
    ProjectivePoint::from_homogeneous(f, u, v)
}

fn pgl_field(q: u64) -> Result<FieldCtx> {
    if q > PGL_MAX_ORDER {
        return Err(Error::Unsupported(format!(
            "q = {q} exceeds {PGL_MAX_ORDER}"
        )));
    }
    FieldCtx::new(q)
}

/// Every normalized invertible Möbius map over GF(q).
pub fn moebius_maps(f: &FieldCtx) -> Vec<MoebiusMap> {
    let q = f.order();
    let mut maps = BTreeSet::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    if let Ok(m) = MoebiusMap::new(f, a, b, c, d) {
                        maps.insert(m);
                    }
                }
            }
        }
    }
    maps.into_iter().collect()
}

/// PGL(2, q) acting on `q + 1` points, checked to have order `(q+1)q(q−1)`
/// and to be sharply 3-transitive.
pub fn build_pgl(q: u64) -> Result<FiniteGroup> {
    let f = pgl_field(q)?;
    let elements: BTreeSet<Permutation> = moebius_maps(&f)
        .iter()
        .map(|m| m.permutation(&f))
        .collect::<Result<_>>()?;
    let n = f.order();
    let g = FiniteGroup::from_elements(n + 1, elements.into_iter().collect())?;
    let expected = (n + 1) * n * (n - 1);
    if g.order() != expected {
        return Err(Error::OrderMismatch {
            name: format!("PGL(2,{q})"),
            expected,
            actual: g.order(),
        });
    }
    if !g.is_sharply_n_transitive(3)? {
        return Err(Error::NotSharplyTransitive(3));
    }
    Ok(g.with_label(format!("PGL(2,{q})")))
}

/// The stabilizer of `∞` in PGL(2, q), restricted to the affine points,
/// equals AGL(1, q).
pub fn stabilizer_is_affine(q: u64) -> Result<bool> {
    let f = pgl_field(q)?;
    let pgl = build_pgl(q)?;
    let n = f.order();
    let stab = pgl.stabilizer(&[n])?;
    let affine_points: Vec<usize> = (0..n).collect();
    let restricted = stab.restrict(&affine_points)?;
    let agl = build_affine_group(&field_tables(&f)?)?;
    Ok(restricted == agl)
}

/// Outcome of [`kerby_sigma_check`]. Counterexamples are the first failing
/// arguments in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KerbyCheck {
    pub involutory: Option<usize>,
    pub multiplicative: Option<(usize, usize)>,
    /// Failing `x` with `1 − y` read as `1 + (−y)`.
    pub equation: Option<usize>,
    /// Failing `x` with `1 − y` read as `(−y) + 1`.
    pub equation_left: Option<usize>,
    /// Failing `x` when `σ(0) = 0` is substituted literally instead of
    /// evaluating on the projective line.
    pub literal_zero: Option<usize>,
}

impl KerbyCheck {
    pub fn holds(&self) -> bool {
        self.involutory.is_none() && self.multiplicative.is_none() && self.equation.is_none()
    }

    /// Whether the two readings of subtraction disagree.
    pub fn variants_differ(&self) -> bool {
        self.equation.is_some() != self.equation_left.is_some()
    }
}

/// `σ(x) = x⁻¹` on `D ∖ {0}`, `σ(0) = 0`.
pub fn inversion(d: &NearStructure) -> Vec<usize> {
    (0..d.order())
        .map(|x| {
            if x == d.zero() {
                x
            } else {
                (0..d.order())
                    .find(|&y| d.mul(x, y) == d.one())
                    .expect("nonzero elements are invertible")
            }
        })
        .collect()
}

/// Checks `σ² = 1`, `σ(ab) = σ(a)σ(b)` on `D ∖ {0}`, and
/// `σ(1 + σ(x)) = 1 − σ(1 + x)` for `x ∈ D ∖ {0, 1}`.
///
/// The equation is read on the projective line: where an argument of `σ`
/// is 0 its value is `∞`, and `1 − ∞ = ∞`. At `x = −1` this asks
/// `1 + σ(x) = 0`. The table entry `σ(0)` must be 0 and is otherwise unused.
pub fn kerby_sigma_check(d: &NearStructure, sigma: &[usize]) -> Result<KerbyCheck> {
    if !verify_near_domain(d).is_near_domain() {
        return Err(Error::Precondition("not a near-domain".into()));
    }
    let n = d.order();
    let (zero, one) = (d.zero(), d.one());
    let distinct: BTreeSet<usize> = sigma.iter().copied().collect();
    if sigma.len() != n || distinct.len() != n || sigma.iter().any(|&s| s >= n) {
        return Err(Error::InvalidPermutation(format!("sigma {sigma:?}")));
    }
    if sigma[zero] != zero {
        return Err(Error::Precondition("sigma must fix zero".into()));
    }
    let nonzero: Vec<usize> = (0..n).filter(|&x| x != zero).collect();
    let involutory = nonzero.iter().copied().find(|&x| sigma[sigma[x]] != x);
    let multiplicative = nonzero
        .iter()
        .flat_map(|&a| nonzero.iter().map(move |&b| (a, b)))
        .find(|&(a, b)| sigma[d.mul(a, b)] != d.mul(sigma[a], sigma[b]));
    // None stands for ∞
    let sig = |a: usize, projective: bool| (a != zero || !projective).then(|| sigma[a]);
    let scan = |right: bool, projective: bool| {
        nonzero.iter().copied().filter(|&x| x != one).find(|&x| {
            let lhs = sig(d.add(one, sigma[x]), projective);
            let rhs = sig(d.add(one, x), projective).map(|s| {
                let y = d.neg(s);
                if right {
                    d.add(one, y)
                } else {
                    d.add(y, one)
                }
            });
            lhs != rhs
        })
    };
    Ok(KerbyCheck {
        involutory,
        multiplicative,
        equation: scan(true, true),
        equation_left: scan(false, true),
        literal_zero: scan(true, false),
    })
}

/// Automorphisms of `(D ∖ {0}, ·)` as maps on `D` fixing zero, found by
/// assigning images to a generating set.
pub fn multiplicative_automorphisms(d: &NearStructure) -> Vec<Vec<usize>> {
    let n = d.order();
    let (zero, one) = (d.zero(), d.one());
    let nonzero: Vec<usize> = (0..n).filter(|&x| x != zero).collect();
    let order_of = |x: usize| {
        let (mut y, mut k) = (x, 1);
        while y != one {
            y = d.mul(y, x);
            k += 1;
        }
        k
    };
    let span = |gens: &[usize]| {
        let mut seen = vec![false; n];
        seen[one] = true;
        let mut stack = vec![one];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = d.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    };
    let mut gens: Vec<usize> = Vec::new();
    for &x in &nonzero {
        if !span(&gens)[x] {
            gens.push(x);
        }
    }
    let mut out = Vec::new();
    let mut images = vec![0; gens.len()];
    fn assign(
        d: &NearStructure,
        gens: &[usize],
        nonzero: &[usize],
        order_of: &dyn Fn(usize) -> usize,
        images: &mut Vec<usize>,
        i: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == gens.len() {
            if let Some(m) = extend_hom(d, gens, images) {
                out.push(m);
            }
            return;
        }
        for &y in nonzero {
            if order_of(y) == order_of(gens[i]) {
                images[i] = y;
                assign(d, gens, nonzero, order_of, images, i + 1, out);
            }
        }
    }
    assign(d, &gens, &nonzero, &order_of, &mut images, 0, &mut out);
    out.sort();
    out
}

/// The homomorphism sending `gens[i]` to `images[i]`, if it is well defined
/// and bijective.
fn extend_hom(d: &NearStructure, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
    let n = d.order();
    let mut map = vec![usize::MAX; n];
    map[d.zero()] = d.zero();
    map[d.one()] = d.one();
    let mut stack = vec![d.one()];
    while let Some(x) = stack.pop() {
        for (&g, &h) in gens.iter().zip(images) {
            let (y, fy) = (d.mul(x, g), d.mul(map[x], h));
            if map[y] == usize::MAX {
                map[y] = fy;
                stack.push(y);
            } else if map[y] != fy {
                return None;
            }
        }
    }
    let distinct: BTreeSet<usize> = map.iter().copied().collect();
    (distinct.len() == n && !distinct.contains(&usize::MAX)).then_some(map)
}

/// All involutory multiplicative automorphisms (including the identity)
/// satisfying the Kerby equation.
pub fn find_kerby_sigma(d: &NearStructure) -> Result<Vec<Vec<usize>>> {
    if d.order() as u64 > PGL_MAX_ORDER {
        return Err(Error::Unsupported(format!(
            "order {} exceeds {PGL_MAX_ORDER}",
            d.order()
        )));
    }
    let mut out = Vec::new();
    for sigma in multiplicative_automorphisms(d) {
        if kerby_sigma_check(d, &sigma)?.holds() {
            out.push(sigma);
        }
    }
    Ok(out)
}
