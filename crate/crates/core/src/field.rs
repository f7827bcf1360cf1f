//! Exact arithmetic in GF(p^k).
//!
//! An element is the polynomial `c0 + c1·x + … + c_{k−1}·x^{k−1}` reduced
//! modulo a fixed monic irreducible, and is addressed by its index
//! `c0 + c1·p + … + c_{k−1}·p^{k−1}`. All operations go through tables built
//! once at construction, so `q` is kept small.

use crate::error::{Error, Result};

/// Largest field order this module will tabulate.
pub const MAX_ORDER: usize = 1 << 12;

/// Returns `(p, k)` with `q = p^k`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p as u32, k))
}

pub fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

/// Polynomial over GF(p), lowest coefficient first, no trailing zeros.
type Poly = Vec<u32>;

fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Poly {
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p);
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let factor = (r[r.len() - 1] * lead_inv) % p;
        for (i, &c) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - factor * c % p) % p;
        }
        r = trim(r);
    }
    r
}

fn mod_inv(a: u32, p: u32) -> u32 {
    (1..p)
        .find(|&b| a * b % p == 1)
        .expect("nonzero residue mod a prime")
}

/// Monic polynomial of degree `deg` whose lower coefficients, read from
/// `x^{deg−1}` down to `x^0`, spell `rank` in base `p`.
fn monic_from_rank(p: u32, deg: u32, mut rank: u64) -> Poly {
    let mut lower = vec![0u32; deg as usize];
    for i in (0..deg as usize).rev() {
        lower[i] = (rank % p as u64) as u32;
        rank /= p as u64;
    }
    // lower[0] is the x^{deg-1} coefficient; store lowest-first.
    let mut poly: Poly = lower.into_iter().rev().collect();
    poly.push(1);
    poly
}

/// Irreducibility by trial division against every monic polynomial of degree
/// at most half the degree.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let poly = trim(poly.to_vec());
    if poly.len() < 2 {
        return false;
    }
    let deg = (poly.len() - 1) as u32;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d);
        for rank in 0..count {
            let divisor = monic_from_rank(p, d, rank);
            if poly_rem(&poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lowest monic irreducible of degree `k` over GF(p), ordering by
/// coefficients from `x^{k−1}` down to the constant term.
pub fn lowest_irreducible(p: u32, k: u32) -> Poly {
    let count = (p as u64).pow(k);
    (0..count)
        .map(|rank| monic_from_rank(p, k, rank))
        .find(|m| is_irreducible(m, p))
        .expect("irreducible polynomials exist in every degree")
}

/// A tabulated finite field.
#[derive(Clone, Debug)]
pub struct FieldCtx {
    p: u32,
    k: u32,
    q: usize,
    modulus: Vec<u32>,
    add: Vec<usize>,
    mul: Vec<usize>,
    neg: Vec<usize>,
    inv: Vec<usize>,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

impl FieldCtx {
    /// GF(q) with the lowest irreducible modulus.
    pub fn new(q: u64) -> Result<Self> {
        let (p, k) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Self::with_modulus(p, k, lowest_irreducible(p, k))
    }

    /// GF(p^k) with an explicit monic modulus (lowest coefficient first).
    pub fn with_modulus(p: u32, k: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::Unsupported(format!("{p} is not prime")));
        }
        let q = (p as u64)
            .checked_pow(k)
            .filter(|&q| q as usize <= MAX_ORDER);
        let Some(q) = q else {
            return Err(Error::Unsupported(format!(
                "GF({p}^{k}) exceeds the table cap"
            )));
        };
        let q = q as usize;
        if modulus.len() != k as usize + 1 || modulus[k as usize] != 1 {
            return Err(Error::Unsupported(format!(
                "modulus {modulus:?} is not monic of degree {k}"
            )));
        }
        if modulus.iter().any(|&c| c >= p) || !is_irreducible(&modulus, p) {
            return Err(Error::Unsupported(format!(
                "modulus {modulus:?} is reducible over GF({p})"
            )));
        }
        let mut ctx = FieldCtx {
            p,
            k,
            q,
            modulus,
            add: vec![0; q * q],
            mul: vec![0; q * q],
            neg: vec![0; q],
            inv: vec![0; q],
        };
        for a in 0..q {
            let ca = ctx.coeffs(a);
            for b in 0..q {
                let cb = ctx.coeffs(b);
                let sum: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
                ctx.add[a * q + b] = ctx.index_of(&sum);
                let mut prod = vec![0u32; 2 * k as usize];
                for (i, x) in ca.iter().enumerate() {
                    for (j, y) in cb.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let red = poly_rem(&prod, &ctx.modulus, p);
                ctx.mul[a * q + b] = ctx.index_of(&red);
            }
        }
        for a in 0..q {
            ctx.neg[a] = (0..q)
                .find(|&b| ctx.add[a * q + b] == 0)
                .expect("additive group");
            if a != 0 {
                ctx.inv[a] = (1..q)
                    .find(|&b| ctx.mul[a * q + b] == 1)
                    .ok_or_else(|| Error::Integrity(format!("no inverse for {a}")))?;
            }
        }
        Ok(ctx)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Coefficients `c0..c_{k−1}` of element `a`.
    pub fn coeffs(&self, mut a: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.k as usize);
        for _ in 0..self.k {
            out.push((a % self.p as usize) as u32);
            a /= self.p as usize;
        }
        out
    }

    /// Index of the element with the given low-first coefficients.
    pub fn index_of(&self, coeffs: &[u32]) -> usize {
        coeffs.iter().rev().fold(0usize, |acc, &c| {
            acc * self.p as usize + (c % self.p) as usize
        })
    }

    /// Image of a prime-field integer.
    pub fn from_int(&self, n: i64) -> usize {
        n.rem_euclid(self.p as i64) as usize
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b]
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg[b])
    }

    pub fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b]
    }

    pub fn inv(&self, a: usize) -> Result<usize> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.inv[a])
    }

    pub fn pow(&self, a: usize, mut e: u64) -> usize {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a ↦ a^p`.
    pub fn frobenius(&self, a: usize) -> usize {
        self.pow(a, self.p as u64)
    }

    /// Whether `b = c·c` for some `c`; zero counts as a square.
    pub fn is_square(&self, b: usize) -> bool {
        (0..self.q).any(|c| self.mul(c, c) == b)
    }

    /// Human-readable polynomial form in the residue `x`, e.g. `2x+1`.
    pub fn format(&self, a: usize) -> String {
        let c = self.coeffs(a);
        let mut terms = Vec::new();
        for (i, &ci) in c.iter().enumerate().rev() {
            if ci == 0 {
                continue;
            }
            let coef = if ci == 1 && i > 0 {
                String::new()
            } else {
                ci.to_string()
            };
            terms.push(match i {
                0 => coef,
                1 => format!("{coef}x"),
                _ => format!("{coef}x^{i}"),
            });
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}
