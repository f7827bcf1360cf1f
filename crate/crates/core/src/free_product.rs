//! Normal forms in `G = (C₂ × F(C)) ∗ F(N)`.
//!
//! The first factor `A` holds the central involution `t` and the generators
//! `c1, c2, …` commuting with it; the second factor is free on `n1, n2, …`.
//! Free-group letters are nonzero integers: `k` is the `k`-th generator and
//! `-k` its inverse.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub type Letter = i32;

fn push_letter(w: &mut Vec<Letter>, l: Letter) {
    if w.last() == Some(&-l) {
        w.pop();
    } else {
        w.push(l);
    }
}

/// Free reduction of a letter sequence.
pub fn free_reduce(letters: &[Letter]) -> Vec<Letter> {
    let mut w = Vec::with_capacity(letters.len());
    for &l in letters {
        push_letter(&mut w, l);
    }
    w
}

fn invert_letters(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|l| -l).collect()
}

fn cyclic_reduce_letters(w: &[Letter]) -> &[Letter] {
    let mut s = w;
    while s.len() >= 2 && s[0] == -s[s.len() - 1] {
        s = &s[1..s.len() - 1];
    }
    s
}

fn is_rotation<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && (a.is_empty() || (0..a.len()).any(|r| a[r..].iter().chain(&a[..r]).eq(b)))
}

/// Conjugacy of freely reduced words in a free group.
pub fn free_conjugate(u: &[Letter], v: &[Letter]) -> bool {
    is_rotation(cyclic_reduce_letters(u), cyclic_reduce_letters(v))
}

/// An element `t^flip · w` of `C₂ × F(C)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ASyllable {
    pub flip: bool,
    pub word: Vec<Letter>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Syllable {
    A(ASyllable),
    N(Vec<Letter>),
}

impl Syllable {
    pub fn is_trivial(&self) -> bool {
        match self {
            Syllable::A(a) => !a.flip && a.word.is_empty(),
            Syllable::N(w) => w.is_empty(),
        }
    }

    pub fn same_factor(&self, other: &Syllable) -> bool {
        matches!(
            (self, other),
            (Syllable::A(_), Syllable::A(_)) | (Syllable::N(_), Syllable::N(_))
        )
    }

    pub fn inverse(&self) -> Syllable {
        match self {
            Syllable::A(a) => Syllable::A(ASyllable {
                flip: a.flip,
                word: invert_letters(&a.word),
            }),
            Syllable::N(w) => Syllable::N(invert_letters(w)),
        }
    }

    /// Product of two syllables from the same factor.
    fn merge(&self, other: &Syllable) -> Syllable {
        match (self, other) {
            (Syllable::A(a), Syllable::A(b)) => {
                let mut word = a.word.clone();
                for &l in &b.word {
                    push_letter(&mut word, l);
                }
                Syllable::A(ASyllable {
                    flip: a.flip ^ b.flip,
                    word,
                })
            }
            (Syllable::N(a), Syllable::N(b)) => {
                let mut word = a.clone();
                for &l in b {
                    push_letter(&mut word, l);
                }
                Syllable::N(word)
            }
            _ => unreachable!("merge across factors"),
        }
    }

    fn conjugate_in_factor(&self, other: &Syllable) -> bool {
        match (self, other) {
            (Syllable::A(a), Syllable::A(b)) => {
                a.flip == b.flip && free_conjugate(&a.word, &b.word)
            }
            (Syllable::N(a), Syllable::N(b)) => free_conjugate(a, b),
            _ => false,
        }
    }
}

/// An element of `G` in normal form: alternating nontrivial syllables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FPWord {
    syllables: Vec<Syllable>,
}

impl FPWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn t() -> Self {
        Self::from_syllable(Syllable::A(ASyllable {
            flip: true,
            word: Vec::new(),
        }))
    }

    /// The commuting generator `c<k>`, `k ≥ 1`.
    pub fn c(k: u32) -> Self {
        Self::from_syllable(Syllable::A(ASyllable {
            flip: false,
            word: vec![letter(k)],
        }))
    }

    /// The free generator `n<k>`, `k ≥ 1`.
    pub fn n(k: u32) -> Self {
        Self::from_syllable(Syllable::N(vec![letter(k)]))
    }

    pub fn from_syllable(s: Syllable) -> Self {
        let mut w = Self::identity();
        w.push(s);
        w
    }

    /// Normalizes an arbitrary syllable sequence.
    pub fn from_syllables(syllables: impl IntoIterator<Item = Syllable>) -> Self {
        let mut w = Self::identity();
        for s in syllables {
            w.push(s);
        }
        w
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn syllable_len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Right-multiplies by one factor element, keeping normal form.
    pub fn push(&mut self, s: Syllable) {
        if s.is_trivial() {
            return;
        }
        match self.syllables.last_mut() {
            Some(last) if last.same_factor(&s) => {
                let merged = last.merge(&s);
                if merged.is_trivial() {
                    self.syllables.pop();
                } else {
                    *last = merged;
                }
            }
            _ => self.syllables.push(s),
        }
    }

    pub fn multiply(&self, other: &FPWord) -> FPWord {
        let mut w = self.clone();
        for s in &other.syllables {
            w.push(s.clone());
        }
        w
    }

    pub fn inverse(&self) -> FPWord {
        FPWord {
            syllables: self.syllables.iter().rev().map(Syllable::inverse).collect(),
        }
    }

    /// `g⁻¹ · self · g`.
    pub fn conjugate(&self, g: &FPWord) -> FPWord {
        g.inverse().multiply(self).multiply(g)
    }

    pub fn pow(&self, e: i64) -> FPWord {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut w = FPWord::identity();
        for _ in 0..e.unsigned_abs() {
            w = w.multiply(&base);
        }
        w
    }

    /// A conjugate of minimal syllable length. The result has length at
    /// most 1, or even length with first and last syllables from different
    /// factors.
    pub fn cyclically_reduce(&self) -> FPWord {
        let mut w = self.clone();
        loop {
            let n = w.syllables.len();
            if n < 2 || !w.syllables[0].same_factor(&w.syllables[n - 1]) {
                return w;
            }
            let last = FPWord::from_syllable(w.syllables[n - 1].clone());
            w = last.multiply(&w).multiply(&last.inverse());
        }
    }

    fn tokens(&self) -> Vec<String> {
        let gen = |prefix: char, l: Letter| {
            if l > 0 {
                format!("{prefix}{l}")
            } else {
                format!("{prefix}{}^-1", -l)
            }
        };
        let mut out = Vec::new();
        for s in &self.syllables {
            match s {
                Syllable::A(a) => {
                    if a.flip {
                        out.push("t".to_string());
                    }
                    out.extend(a.word.iter().map(|&l| gen('c', l)));
                }
                Syllable::N(w) => out.extend(w.iter().map(|&l| gen('n', l))),
            }
        }
        out
    }
}

fn letter(k: u32) -> Letter {
    assert!(k >= 1, "generator indices start at 1");
    Letter::try_from(k).expect("generator index fits in i32")
}

impl fmt::Display for FPWord {
    /// Space-separated tokens; the identity prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("1");
        }
        f.write_str(&self.tokens().join(" "))
    }
}

impl FromStr for FPWord {
    type Err = Error;

    /// Tokens `t`, `c<k>`, `n<k>`, optionally with an exponent `^e`, and `1`.
    fn from_str(s: &str) -> Result<FPWord> {
        let mut w = FPWord::identity();
        for tok in s.split_whitespace() {
            let (base, exp) = match tok.split_once('^') {
                Some((b, e)) => {
                    let e: i64 = e
                        .parse()
                        .map_err(|_| Error::InvalidWord(format!("bad exponent in `{tok}`")))?;
                    (b, e)
                }
                None => (tok, 1),
            };
            let g = match base {
                "1" => FPWord::identity(),
                "t" => FPWord::t(),
                _ => {
                    let bad = || Error::InvalidWord(format!("unknown token `{tok}`"));
                    let (kind, idx) = base.split_at(1);
                    let k: u32 = idx.parse().map_err(|_| bad())?;
                    if k == 0 || k > i32::MAX as u32 {
                        return Err(bad());
                    }
                    match kind {
                        "c" => FPWord::c(k),
                        "n" => FPWord::n(k),
                        _ => return Err(bad()),
                    }
                }
            };
            w = w.multiply(&g.pow(exp));
        }
        Ok(w)
    }
}

pub fn fp_multiply(u: &FPWord, v: &FPWord) -> FPWord {
    u.multiply(v)
}

pub fn fp_invert(u: &FPWord) -> FPWord {
    u.inverse()
}

pub fn fp_conjugate(u: &FPWord, g: &FPWord) -> FPWord {
    u.conjugate(g)
}

/// `u² = 1` with `u ≠ 1`.
pub fn fp_is_involution(u: &FPWord) -> bool {
    let inv = !u.is_identity() && u.multiply(u).is_identity();
    debug_assert_eq!(inv, u.cyclically_reduce() == FPWord::t());
    inv
}

/// Conjugacy in `G`: cyclically reduce both sides, then compare inside a
/// factor (length 1) or up to cyclic rotation of syllables.
pub fn fp_conjugacy_test(u: &FPWord, v: &FPWord) -> bool {
    let (u, v) = (u.cyclically_reduce(), v.cyclically_reduce());
    match (u.syllables.as_slice(), v.syllables.as_slice()) {
        ([], []) => true,
        ([a], [b]) => a.conjugate_in_factor(b),
        (a, b) if a.len() >= 2 => is_rotation(a, b),
        _ => false,
    }
}

/// Membership in `tJ = {t·j : j ∈ J} ∪ {1}`, via `t·(t·j) = j`.
pub fn fp_in_tj(u: &FPWord) -> bool {
    let tu = FPWord::t().multiply(u);
    tu.is_identity() || fp_is_involution(&tu)
}

/// Which generators are available to enumerations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Generators {
    pub commuting: u32,
    pub free: u32,
}

impl Default for Generators {
    fn default() -> Self {
        Generators {
            commuting: 1,
            free: 1,
        }
    }
}

/// The simple syllables: `t, c^±1, t·c^±1` in `A` and `n^±1` in `F(N)`.
pub fn simple_syllables(gens: Generators) -> (Vec<Syllable>, Vec<Syllable>) {
    let mut a = vec![Syllable::A(ASyllable {
        flip: true,
        word: Vec::new(),
    })];
    for flip in [false, true] {
        for k in 1..=gens.commuting {
            for l in [letter(k), -letter(k)] {
                a.push(Syllable::A(ASyllable {
                    flip,
                    word: vec![l],
                }));
            }
        }
    }
    let mut n = Vec::new();
    for k in 1..=gens.free {
        n.push(Syllable::N(vec![letter(k)]));
        n.push(Syllable::N(vec![-letter(k)]));
    }
    (a, n)
}

/// All words of at most `radius` simple syllables, by length and then by
/// syllable choice. Distinct sequences are distinct elements of `G`.
pub fn enumerate_words(radius: usize, gens: Generators) -> Vec<FPWord> {
    let (a, n) = simple_syllables(gens);
    let mut out = vec![FPWord::identity()];
    let mut layer = vec![FPWord::identity()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &layer {
            let starts_a = matches!(w.syllables.last(), None | Some(Syllable::N(_)));
            let starts_n = matches!(w.syllables.last(), None | Some(Syllable::A(_)));
            if starts_a {
                for s in &a {
                    let mut v = w.clone();
                    v.syllables.push(s.clone());
                    next.push(v);
                }
            }
            if starts_n {
                for s in &n {
                    let mut v = w.clone();
                    v.syllables.push(s.clone());
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// `(t·t^u)(t·t^v)`.
pub fn neumann_product(u: &FPWord, v: &FPWord) -> FPWord {
    let t = FPWord::t();
    let tu = t.multiply(&t.conjugate(u));
    let tv = t.multiply(&t.conjugate(v));
    tu.multiply(&tv)
}

/// Conjugator pairs `(u, v)` within `radius` with `(t·t^u)(t·t^v) ∉ tJ`, in
/// enumeration order.
pub fn neumann_witnesses(radius: usize, gens: Generators) -> Vec<(FPWord, FPWord)> {
    let words = enumerate_words(radius, gens);
    (0..words.len() * words.len())
        .into_par_iter()
        .filter_map(|i| {
            let (u, v) = (&words[i / words.len()], &words[i % words.len()]);
            (!fp_in_tj(&neumann_product(u, v))).then(|| (u.clone(), v.clone()))
        })
        .collect()
}

/// The first witness in enumeration order, certifying that `tJ` is not
/// closed under multiplication.
pub fn neumann_witness_search(radius: usize, gens: Generators) -> Option<(FPWord, FPWord)> {
    let words = enumerate_words(radius, gens);
    (0..words.len() * words.len())
        .into_par_iter()
        .find_first(|&i| {
            let (u, v) = (&words[i / words.len()], &words[i % words.len()]);
            !fp_in_tj(&neumann_product(u, v))
        })
        .map(|i| {
            (
                words[i / words.len()].clone(),
                words[i % words.len()].clone(),
            )
        })
}
