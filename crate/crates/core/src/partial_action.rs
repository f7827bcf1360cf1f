//! Finite stages of the staged construction of a non-split sharply
//! 2-transitive action of `(C₂ × F(C)) ∗ F(N)`.
//!
//! A stage is a finite point set with a total fixed-point-free involution
//! `t` and partial injections for the generators activated so far. Pairs of
//! points are processed in a fair order; each unjoined pair gets a fresh
//! generator carrying the base pair onto it. Totalization then makes every
//! generator a bijection of the *core* points, using fresh points outside
//! the core. The core grows to the whole point set once the queue reaches a
//! point outside it.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_product::{fp_conjugacy_test, ASyllable, FPWord, Letter, Syllable};

type Pair = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GenKind {
    /// Commutes with `t`; lives in the `C₂ × F(C)` factor.
    Commuting,
    Free,
}

impl GenKind {
    fn prefix(self) -> char {
        match self {
            GenKind::Commuting => 'c',
            GenKind::Free => 'n',
        }
    }
}

/// A partial injection on the points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub kind: GenKind,
    /// 1-based index within its kind.
    pub index: u32,
    fwd: Vec<Option<usize>>,
    bwd: Vec<Option<usize>>,
}

impl Generator {
    fn new(kind: GenKind, index: u32, points: usize) -> Self {
        Generator {
            kind,
            index,
            fwd: vec![None; points],
            bwd: vec![None; points],
        }
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.kind.prefix(), self.index)
    }

    pub fn image(&self, p: usize) -> Option<usize> {
        self.fwd.get(p).copied().flatten()
    }

    pub fn preimage(&self, p: usize) -> Option<usize> {
        self.bwd.get(p).copied().flatten()
    }

    /// Defined pairs `p -> q` in ascending `p`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.fwd
            .iter()
            .enumerate()
            .filter_map(|(p, q)| q.map(|q| (p, q)))
            .collect()
    }

    fn set(&mut self, p: usize, q: usize) -> Result<()> {
        match (self.fwd[p], self.bwd[q]) {
            (None, None) => {
                self.fwd[p] = Some(q);
                self.bwd[q] = Some(p);
                Ok(())
            }
            (Some(old), _) if old == q => Ok(()),
            _ => Err(Error::Integrity(format!(
                "{} cannot map {p} -> {q}: not injective",
                self.name()
            ))),
        }
    }

    fn grow(&mut self, points: usize) {
        self.fwd.resize(points, None);
        self.bwd.resize(points, None);
    }
}

/// A word evaluated on every point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialEval {
    pub word: FPWord,
    /// True when the word is defined at every point.
    pub defined: bool,
    pub image: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    t: Vec<usize>,
    gens: Vec<Generator>,
    commuting: Vec<usize>,
    free: Vec<usize>,
    base: (usize, usize),
    core: usize,
    cursor: (usize, usize),
    consumed: usize,
    joined: BTreeMap<(usize, usize), FPWord>,
    steps: usize,
    seed: u64,
}

/// Four points, `t = (0 1)(2 3)`, base pair `(0, 1)`.
pub fn init_stage(seed: u64) -> Stage {
    let mut joined = BTreeMap::new();
    joined.insert((0, 1), FPWord::identity());
    joined.insert((1, 0), FPWord::t());
    Stage {
        t: vec![1, 0, 3, 2],
        gens: Vec::new(),
        commuting: Vec::new(),
        free: Vec::new(),
        base: (0, 1),
        core: 4,
        cursor: (1, 0),
        consumed: 0,
        joined,
        steps: 0,
        seed,
    }
}

/// `init_stage` followed by `steps` processed pairs, totalizing after every
/// join.
pub fn run(steps: usize, seed: u64) -> Result<Stage> {
    run_with_cadence(steps, seed, 1)
}

/// As [`run`], totalizing after every `k` processed pairs and once at the end.
pub fn run_with_cadence(steps: usize, seed: u64, k: usize) -> Result<Stage> {
    let k = k.max(1);
    let mut s = init_stage(seed);
    for i in 1..=steps {
        s.process_next_pair()?;
        if i % k == 0 || i == steps {
            s.totalize()?;
        }
    }
    Ok(s)
}

impl Stage {
    pub fn points(&self) -> usize {
        self.t.len()
    }

    pub fn t_map(&self) -> &[usize] {
        &self.t
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn commuting_count(&self) -> usize {
        self.commuting.len()
    }

    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    pub fn base_pair(&self) -> (usize, usize) {
        self.base
    }

    pub fn core_size(&self) -> usize {
        self.core
    }

    pub fn joined(&self) -> &BTreeMap<(usize, usize), FPWord> {
        &self.joined
    }

    pub fn step_count(&self) -> usize {
        self.steps
    }

    /// Stored for reproducibility of reports; the construction itself is
    /// deterministic.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of ordered pairs of existing points still waiting.
    pub fn pending_pairs(&self) -> usize {
        let n = self.points();
        n * (n - 1) - 2 - self.consumed
    }

    fn pair_at(m: usize, i: usize) -> (usize, usize) {
        let j = i / 2;
        if i.is_multiple_of(2) {
            (j, m)
        } else {
            (m, j)
        }
    }

    /// The next pair in order of increasing larger point, without consuming it.
    pub fn peek_pair(&self) -> Option<(usize, usize)> {
        let mut c = self.cursor;
        self.advance(&mut c)
    }

    fn advance(&self, c: &mut (usize, usize)) -> Option<(usize, usize)> {
        let (x, y) = self.base;
        loop {
            let (m, i) = *c;
            if m >= self.points() {
                return None;
            }
            if i >= 2 * m {
                *c = (m + 1, 0);
                continue;
            }
            c.1 += 1;
            let p = Self::pair_at(m, i);
            if p != (x, y) && p != (y, x) {
                return Some(p);
            }
        }
    }

    fn fresh_pair(&mut self) -> (usize, usize) {
        let m = self.points();
        self.t.extend([m + 1, m]);
        for g in &mut self.gens {
            g.grow(m + 2);
        }
        (m, m + 1)
    }

    fn letter_gen(&self, kind: GenKind, l: Letter) -> &Generator {
        let k = l.unsigned_abs() as usize - 1;
        match kind {
            GenKind::Commuting => &self.gens[self.commuting[k]],
            GenKind::Free => &self.gens[self.free[k]],
        }
    }

    fn apply_letter(&self, kind: GenKind, l: Letter, p: usize) -> Option<usize> {
        if l.unsigned_abs() as usize > self.count(kind) {
            return None;
        }
        let g = self.letter_gen(kind, l);
        if l > 0 {
            g.image(p)
        } else {
            g.preimage(p)
        }
    }

    fn count(&self, kind: GenKind) -> usize {
        match kind {
            GenKind::Commuting => self.commuting.len(),
            GenKind::Free => self.free.len(),
        }
    }

    fn apply_syllable(&self, s: &Syllable, mut p: usize) -> Option<usize> {
        match s {
            Syllable::A(a) => {
                if a.flip {
                    p = self.t[p];
                }
                for &l in &a.word {
                    p = self.apply_letter(GenKind::Commuting, l, p)?;
                }
            }
            Syllable::N(w) => {
                for &l in w {
                    p = self.apply_letter(GenKind::Free, l, p)?;
                }
            }
        }
        Some(p)
    }

    /// `p^w`, reading the normal form left to right and applying `t` before
    /// the commuting letters of each syllable.
    pub fn eval(&self, w: &FPWord, p: usize) -> Option<usize> {
        w.syllables()
            .iter()
            .try_fold(p, |p, s| self.apply_syllable(s, p))
    }

    pub fn partial_eval(&self, w: &FPWord) -> PartialEval {
        let image: Vec<Option<usize>> = (0..self.points()).map(|p| self.eval(w, p)).collect();
        PartialEval {
            word: w.clone(),
            defined: image.iter().all(Option::is_some),
            image,
        }
    }

    /// Activates a new generator with the given assignments, enforcing
    /// injectivity and, for commuting generators, `(p^t)^c = (p^c)^t`.
    pub fn add_generator(&mut self, kind: GenKind, pairs: &[(usize, usize)]) -> Result<FPWord> {
        let index = self.count(kind) as u32 + 1;
        let mut g = Generator::new(kind, index, self.points());
        for &(p, q) in pairs {
            if p >= self.points() || q >= self.points() {
                return Err(Error::PointOutOfRange {
                    point: p.max(q),
                    degree: self.points(),
                });
            }
            g.set(p, q)?;
            if kind == GenKind::Commuting {
                g.set(self.t[p], self.t[q])?;
            }
        }
        let pos = self.gens.len();
        self.gens.push(g);
        match kind {
            GenKind::Commuting => {
                self.commuting.push(pos);
                Ok(FPWord::c(index))
            }
            GenKind::Free => {
                self.free.push(pos);
                Ok(FPWord::n(index))
            }
        }
    }

    fn moves(&self) -> Vec<Syllable> {
        let mut m = vec![Syllable::A(ASyllable {
            flip: true,
            word: Vec::new(),
        })];
        for g in &self.gens {
            let k = g.index as Letter;
            for l in [k, -k] {
                m.push(match g.kind {
                    GenKind::Commuting => Syllable::A(ASyllable {
                        flip: false,
                        word: vec![l],
                    }),
                    GenKind::Free => Syllable::N(vec![l]),
                });
            }
        }
        m
    }

    /// Breadth-first search of the orbit of `start` under the defined maps.
    /// Returns the reached pairs in discovery order with a word carrying
    /// `start` to each.
    fn pair_orbit(&self, start: (usize, usize)) -> Vec<((usize, usize), FPWord)> {
        let moves = self.moves();
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut order: Vec<(Pair, Option<(usize, usize)>)> = Vec::new();
        seen.insert(start, 0);
        order.push((start, None));
        let mut queue = VecDeque::from([start]);
        while let Some((a, b)) = queue.pop_front() {
            let from = seen[&(a, b)];
            for (mi, m) in moves.iter().enumerate() {
                let (Some(a2), Some(b2)) = (self.apply_syllable(m, a), self.apply_syllable(m, b))
                else {
                    continue;
                };
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry((a2, b2)) {
                    e.insert(order.len());
                    order.push(((a2, b2), Some((from, mi))));
                    queue.push_back((a2, b2));
                }
            }
        }
        let mut words: Vec<FPWord> = Vec::with_capacity(order.len());
        for (_, parent) in &order {
            let w = match parent {
                None => FPWord::identity(),
                Some((from, mi)) => {
                    let mut w = words[*from].clone();
                    w.push(moves[*mi].clone());
                    w
                }
            };
            words.push(w);
        }
        order.into_iter().map(|(p, _)| p).zip(words).collect()
    }

    /// Takes the next pair `(w, z)` and joins it to the base pair `(x, y)`:
    /// nothing new if its orbit already contains `(x, y)`; a fresh commuting
    /// generator if its orbit contains a pair `(a, a^t)`, so that `(w, z)` is
    /// swapped by a conjugate of `t`; a fresh free generator otherwise.
    pub fn process_next_pair(&mut self) -> Result<()> {
        let mut c = self.cursor;
        let (w, z) = self.advance(&mut c).ok_or(Error::QueueEmpty)?;
        self.cursor = c;
        self.consumed += 1;
        self.steps += 1;
        if w >= self.core || z >= self.core {
            self.core = self.points();
        }
        if self.joined.contains_key(&(w, z)) {
            return Ok(());
        }
        let (x, y) = self.base;
        let orbit = self.pair_orbit((w, z));
        let word = if let Some((_, g)) = orbit.iter().find(|(p, _)| *p == (x, y)) {
            g.inverse()
        } else if let Some(((a, at), g)) = orbit.iter().find(|((a, b), _)| self.t[*a] == *b) {
            let c = self.add_generator(GenKind::Commuting, &[(x, *a)])?;
            debug_assert_eq!(self.t[*a], *at);
            c.multiply(&g.inverse())
        } else {
            self.add_generator(GenKind::Free, &[(x, w), (y, z)])?
        };
        if self.eval(&word, x) != Some(w) || self.eval(&word, y) != Some(z) {
            return Err(Error::Integrity(format!(
                "join word {word} does not carry base to ({w}, {z})"
            )));
        }
        self.joined.insert((w, z), word);
        Ok(())
    }

    /// Makes every generator a bijection of the core points. Missing images
    /// and preimages become fresh `t`-pairs; commuting generators map
    /// `t`-pairs to `t`-pairs. Fresh points are outside the core, so a
    /// second call changes nothing.
    pub fn totalize(&mut self) -> Result<()> {
        for gi in 0..self.gens.len() {
            let kind = self.gens[gi].kind;
            for p in 0..self.core {
                if self.gens[gi].fwd[p].is_none() {
                    let (m, mt) = self.fresh_pair();
                    self.gens[gi].set(p, m)?;
                    if kind == GenKind::Commuting {
                        self.gens[gi].set(self.t[p], mt)?;
                    }
                }
            }
            for q in 0..self.core {
                if self.gens[gi].bwd[q].is_none() {
                    let (m, mt) = self.fresh_pair();
                    self.gens[gi].set(m, q)?;
                    if kind == GenKind::Commuting {
                        self.gens[gi].set(mt, self.t[q])?;
                    }
                }
            }
        }
        let clash = self.structure_violations();
        if let Some(v) = clash.first() {
            return Err(Error::Integrity(v.clone()));
        }
        Ok(())
    }

    /// `t` a total fixed-point-free involution, generators injective, and
    /// the commuting constraint wherever both sides are defined.
    fn structure_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.points();
        for p in 0..n {
            let q = self.t[p];
            if q >= n || q == p || self.t[q] != p {
                out.push(format!("t is not a fixed-point-free involution at {p}"));
            }
        }
        for g in &self.gens {
            for p in 0..n {
                if let Some(q) = g.fwd[p] {
                    if g.bwd[q] != Some(p) {
                        out.push(format!("{} is not injective at {p}", g.name()));
                    }
                }
                if let Some(q) = g.bwd[p] {
                    if g.fwd[q] != Some(p) {
                        out.push(format!("{} has an inconsistent preimage at {p}", g.name()));
                    }
                }
            }
            if g.kind == GenKind::Commuting {
                for p in 0..n {
                    let lhs = g.image(self.t[p]);
                    let rhs = g.image(p).map(|q| self.t[q]);
                    if (lhs.is_some() || rhs.is_some()) && lhs != rhs {
                        out.push(format!("{} does not commute with t at {p}", g.name()));
                    }
                }
            }
        }
        out
    }

    /// Simple syllables over the active generators: `t, c^±1, t·c^±1` and
    /// `n^±1`.
    fn simple_syllables(&self) -> (Vec<Syllable>, Vec<Syllable>) {
        let gens = crate::free_product::Generators {
            commuting: self.commuting.len() as u32,
            free: self.free.len() as u32,
        };
        crate::free_product::simple_syllables(gens)
    }
}

/// Outcome of [`check_invariants`]; every list is empty on success.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvariantReport {
    pub depth: usize,
    pub words_checked: usize,
    /// A nontrivial word fixing two points.
    pub frobenius: Vec<String>,
    /// Distinct words carrying the base pair to the same pair.
    pub uniqueness: Vec<String>,
    pub structure: Vec<String>,
    /// `(p^u)^s ≠ p^(us)` with both sides defined.
    pub coherence: Vec<String>,
    /// A word swapping two disjoint pairs without being conjugate to `t`.
    pub involutions: Vec<String>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn violations(&self) -> usize {
        self.frobenius.len()
            + self.uniqueness.len()
            + self.structure.len()
            + self.coherence.len()
            + self.involutions.len()
    }
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "depth: {}", self.depth)?;
        writeln!(f, "words_checked: {}", self.words_checked)?;
        for (name, list) in [
            ("frobenius", &self.frobenius),
            ("uniqueness", &self.uniqueness),
            ("structure", &self.structure),
            ("coherence", &self.coherence),
            ("involutions", &self.involutions),
        ] {
            match list.first() {
                None => writeln!(f, "{name}: pass")?,
                Some(w) => writeln!(f, "{name}: FAIL ({} violations; first: {w})", list.len())?,
            }
        }
        writeln!(f, "violations: {}", self.violations())
    }
}

#[derive(Default)]
struct PointScan {
    words: usize,
    fixing: Vec<FPWord>,
    swapping: Vec<FPWord>,
    coherence: Vec<String>,
}

/// Depth-first enumeration of simple-syllable normal forms of length at
/// most `depth` defined at `p`.
fn scan_point(s: &Stage, a: &[Syllable], n: &[Syllable], p: usize, depth: usize) -> PointScan {
    let all: Vec<&Syllable> = a.iter().chain(n).collect();
    let mut scan = Scan {
        s,
        a,
        n,
        all: &all,
        p,
        depth,
        path: Vec::new(),
        out: PointScan::default(),
    };
    scan.rec(p);
    scan.out
}

struct Scan<'a> {
    s: &'a Stage,
    a: &'a [Syllable],
    n: &'a [Syllable],
    all: &'a [&'a Syllable],
    p: usize,
    depth: usize,
    path: Vec<Syllable>,
    out: PointScan,
}

impl Scan<'_> {
    fn rec(&mut self, q: usize) {
        let (s, p) = (self.s, self.p);
        let word = FPWord::from_syllables(self.path.iter().cloned());
        if !self.path.is_empty() {
            self.out.words += 1;
            if q == p {
                self.out.fixing.push(word.clone());
            } else if s.eval(&word, q) == Some(p) {
                self.out.swapping.push(word.clone());
            }
        }
        if self.path.len() == self.depth {
            return;
        }
        for &sy in self.all {
            let Some(r) = s.apply_syllable(sy, q) else {
                continue;
            };
            let prod = word.multiply(&FPWord::from_syllable(sy.clone()));
            if let Some(direct) = s.eval(&prod, p) {
                if direct != r {
                    self.out.coherence.push(format!(
                        "point {p}: ({word}) then ({}) gives {r}, ({prod}) gives {direct}",
                        FPWord::from_syllable(sy.clone())
                    ));
                }
            }
        }
        let choices: Vec<&Syllable> = match self.path.last() {
            None => self.all.to_vec(),
            Some(Syllable::A(_)) => self.n.iter().collect(),
            Some(Syllable::N(_)) => self.a.iter().collect(),
        };
        for sy in choices {
            if let Some(r) = s.apply_syllable(sy, q) {
                self.path.push(sy.clone());
                self.rec(r);
                self.path.pop();
            }
        }
    }
}

/// Checks the stage against the finite shadows of sharp 2-transitivity over
/// all simple-syllable words of length at most `depth`.
pub fn check_invariants(s: &Stage, depth: usize) -> Result<InvariantReport> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    let (a, n) = s.simple_syllables();
    let scans: Vec<PointScan> = (0..s.points())
        .into_par_iter()
        .map(|p| scan_point(s, &a, &n, p, depth))
        .collect();

    let mut report = InvariantReport {
        depth,
        structure: s.structure_violations(),
        ..Default::default()
    };
    let mut fixers: BTreeMap<&FPWord, Vec<usize>> = BTreeMap::new();
    let mut swappers: BTreeMap<&FPWord, usize> = BTreeMap::new();
    for (p, scan) in scans.iter().enumerate() {
        report.words_checked += scan.words;
        report.coherence.extend(scan.coherence.iter().cloned());
        for w in &scan.fixing {
            fixers.entry(w).or_default().push(p);
        }
        for w in &scan.swapping {
            *swappers.entry(w).or_default() += 1;
        }
    }
    for (w, pts) in fixers {
        if pts.len() >= 2 {
            report
                .frobenius
                .push(format!("{w} fixes {} and {}", pts[0], pts[1]));
        }
    }
    for (w, count) in swappers {
        if count >= 4 && !fp_conjugacy_test(w, &FPWord::t()) {
            report.involutions.push(format!(
                "{w} swaps {} points but is not conjugate to t",
                count
            ));
        }
    }
    report.uniqueness = uniqueness_violations(s, &a, &n, depth);
    Ok(report)
}

fn uniqueness_violations(s: &Stage, a: &[Syllable], n: &[Syllable], depth: usize) -> Vec<String> {
    let (x, y) = s.base;
    let mut reached: BTreeMap<(usize, usize), FPWord> = BTreeMap::new();
    let mut out = Vec::new();
    let mut layer = vec![((x, y), FPWord::identity())];
    reached.insert((x, y), FPWord::identity());
    for _ in 0..depth {
        let mut next = Vec::new();
        for ((p, q), w) in &layer {
            let choices = match w.syllables().last() {
                None => a.iter().chain(n).collect::<Vec<_>>(),
                Some(Syllable::A(_)) => n.iter().collect(),
                Some(Syllable::N(_)) => a.iter().collect(),
            };
            for sy in choices {
                let (Some(p2), Some(q2)) = (s.apply_syllable(sy, *p), s.apply_syllable(sy, *q))
                else {
                    continue;
                };
                let mut w2 = w.clone();
                w2.push(sy.clone());
                match reached.get(&(p2, q2)) {
                    Some(prev) if *prev != w2 => out.push(format!(
                        "{prev} and {w2} both carry the base pair to ({p2}, {q2})"
                    )),
                    Some(_) => {}
                    None => {
                        reached.insert((p2, q2), w2.clone());
                    }
                }
                next.push(((p2, q2), w2));
            }
        }
        layer = next;
    }
    out
}

fn parse_map_tokens(line: usize, tokens: &str) -> Result<Vec<(usize, usize)>> {
    tokens
        .split_whitespace()
        .map(|tok| {
            let bad = || Error::Parse {
                line,
                msg: format!("expected `p->q`, found `{tok}`"),
            };
            let (p, q) = tok.split_once("->").ok_or_else(bad)?;
            Ok((p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?))
        })
        .collect()
}

impl Stage {
    /// Text snapshot: header counters, `t`, one line per generator in
    /// activation order, and the join ledger.
    pub fn to_snapshot(&self) -> String {
        let mut s = String::new();
        let pairs = |v: Vec<(usize, usize)>| {
            v.iter()
                .map(|(p, q)| format!("{p}->{q}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        s.push_str(&format!("points: {}\n", self.points()));
        s.push_str(&format!("core: {}\n", self.core));
        s.push_str(&format!("steps: {}\n", self.steps));
        s.push_str(&format!("seed: {}\n", self.seed));
        s.push_str(&format!(
            "t: {}\n",
            pairs(self.t.iter().copied().enumerate().collect())
        ));
        for g in &self.gens {
            s.push_str(&format!("{}: {}\n", g.name(), pairs(g.pairs())));
        }
        for ((w, z), word) in &self.joined {
            s.push_str(&format!("join: {w} {z} : {word}\n"));
        }
        s
    }

    /// Inverse of [`Stage::to_snapshot`]. The pair cursor is recovered from
    /// the step count.
    pub fn from_snapshot(text: &str) -> Result<Stage> {
        let mut points = None;
        let mut core = None;
        let mut steps = None;
        let mut seed = 0;
        let mut t: Option<Vec<usize>> = None;
        let mut gens: Vec<(GenKind, u32, Vec<Pair>, usize)> = Vec::new();
        let mut joined = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let (key, rest) = raw.split_once(':').ok_or(Error::Parse {
                line,
                msg: "expected `key: value`".into(),
            })?;
            let num = |v: &str| {
                v.trim().parse::<u64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("expected a number for `{key}`"),
                })
            };
            match key {
                "points" => points = Some(num(rest)? as usize),
                "core" => core = Some(num(rest)? as usize),
                "steps" => steps = Some(num(rest)? as usize),
                "seed" => seed = num(rest)?,
                "t" => {
                    let map = parse_map_tokens(line, rest)?;
                    let mut v = vec![usize::MAX; map.len()];
                    for (p, q) in map {
                        if p >= v.len() {
                            return Err(Error::Parse {
                                line,
                                msg: format!("t is not total: point {p} out of order"),
                            });
                        }
                        v[p] = q;
                    }
                    t = Some(v);
                }
                "join" => {
                    let (pair, word) = rest.split_once(" : ").ok_or(Error::Parse {
                        line,
                        msg: "expected `join: w z : word`".into(),
                    })?;
                    let pts: Vec<&str> = pair.split_whitespace().collect();
                    let [w, z] = pts[..] else {
                        return Err(Error::Parse {
                            line,
                            msg: "expected two points".into(),
                        });
                    };
                    let word: FPWord = word.parse().map_err(|e: Error| Error::Parse {
                        line,
                        msg: e.to_string(),
                    })?;
                    joined.insert((num(w)? as usize, num(z)? as usize), word);
                }
                _ => {
                    let kind = match key.chars().next() {
                        Some('c') => GenKind::Commuting,
                        Some('n') => GenKind::Free,
                        _ => {
                            return Err(Error::Parse {
                                line,
                                msg: format!("unknown key `{key}`"),
                            })
                        }
                    };
                    let index: u32 = key[1..].parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("unknown key `{key}`"),
                    })?;
                    gens.push((kind, index, parse_map_tokens(line, rest)?, line));
                }
            }
        }
        let missing = |what: &str| Error::Parse {
            line: text.lines().count(),
            msg: format!("missing `{what}` line"),
        };
        let points = points.ok_or_else(|| missing("points"))?;
        let t = t.ok_or_else(|| missing("t"))?;
        if t.len() != points {
            return Err(Error::Integrity(format!(
                "t has {} points, expected {points}",
                t.len()
            )));
        }
        let mut stage = init_stage(seed);
        stage.t = t;
        stage.core = core.ok_or_else(|| missing("core"))?;
        for (kind, index, pairs, line) in gens {
            if index as usize != stage.count(kind) + 1 {
                return Err(Error::Parse {
                    line,
                    msg: format!("generator {}{index} out of activation order", kind.prefix()),
                });
            }
            stage.add_generator(kind, &pairs)?;
        }
        stage.joined = joined;
        let steps = steps.ok_or_else(|| missing("steps"))?;
        for _ in 0..steps {
            let mut c = stage.cursor;
            stage.advance(&mut c).ok_or(Error::QueueEmpty)?;
            stage.cursor = c;
            stage.consumed += 1;
        }
        stage.steps = steps;
        if let Some(v) = stage.structure_violations().first() {
            return Err(Error::Integrity(v.clone()));
        }
        Ok(stage)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> FPWord {
        s.parse().unwrap()
    }

    #[test]
    fn initial_stage() {
        let s = init_stage(1);
        assert_eq!(s.points(), 4);
        assert!((0..4).all(|p| s.t_map()[p] != p && s.t_map()[s.t_map()[p]] == p));
        let expected: BTreeMap<_, _> = [((0, 1), FPWord::identity()), ((1, 0), FPWord::t())].into();
        assert_eq!(s.joined(), &expected);
        assert_eq!(s.pending_pairs(), 10);
        assert_eq!(s.peek_pair(), Some((0, 2)));
    }

    #[test]
    fn first_pair_gets_free_generator() {
        let mut s = init_stage(1);
        s.process_next_pair().unwrap();
        assert_eq!(s.free_count(), 1);
        let n1 = &s.generators()[0];
        assert_eq!((n1.image(0), n1.image(1)), (Some(0), Some(2)));
        assert_eq!(s.joined()[&(0, 2)], w("n1"));
    }

    #[test]
    fn swapped_pair_gets_commuting_generator() {
        let mut s = init_stage(1);
        let c = s.add_generator(GenKind::Commuting, &[(0, 2)]).unwrap();
        assert_eq!(c, w("c1"));
        let c1 = &s.generators()[0];
        assert_eq!((c1.image(0), c1.image(1)), (Some(2), Some(3)));
        // (0^t)^c1 = 3 = (0^c1)^t
        assert_eq!(c1.image(s.t_map()[0]), Some(s.t_map()[2]));

        let mut s = init_stage(1);
        let mut seen = Vec::new();
        while let Some(p) = s.peek_pair() {
            if p.0 >= 4 || p.1 >= 4 {
                break;
            }
            s.process_next_pair().unwrap();
            seen.push(p);
        }
        assert_eq!(seen.len(), 10);
        assert!(s.commuting_count() >= 1);
        let (x, y) = s.base_pair();
        for (&(pw, pz), word) in s.joined() {
            assert_eq!(s.eval(word, x), Some(pw));
            assert_eq!(s.eval(word, y), Some(pz));
        }
    }

    #[test]
    fn totalize_is_total_and_idempotent() {
        let mut s = init_stage(1);
        s.process_next_pair().unwrap();
        s.totalize().unwrap();
        for g in s.generators() {
            for p in 0..s.core_size() {
                assert!(g.image(p).is_some() && g.preimage(p).is_some());
            }
        }
        let before = s.clone();
        s.totalize().unwrap();
        assert_eq!(s, before);
        assert!(s.structure_violations().is_empty());
    }

    #[test]
    fn golden_point_counts() {
        let mut s = init_stage(1);
        s.process_next_pair().unwrap();
        s.process_next_pair().unwrap();
        s.totalize().unwrap();
        assert_eq!(s.points(), 12);
        assert_eq!(s.joined()[&(2, 0)], w("t n1"));
        assert_eq!(run(10, 1).unwrap().points(), 24);
        assert_eq!(run(50, 1).unwrap().points(), 688);
    }

    #[test]
    fn monotone_growth() {
        let mut s = init_stage(1);
        let mut last = (s.points(), s.joined().len(), s.generators().len());
        for _ in 0..30 {
            s.process_next_pair().unwrap();
            s.totalize().unwrap();
            let now = (s.points(), s.joined().len(), s.generators().len());
            assert!(now.0 >= last.0 && now.1 >= last.1 && now.2 >= last.2);
            last = now;
        }
    }

    #[test]
    fn run_zero_is_init() {
        assert_eq!(run(0, 7).unwrap(), init_stage(7));
    }

    #[test]
    fn run_ten_passes_depth_three() {
        let s = run(10, 1).unwrap();
        let r = check_invariants(&s, 3).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.words_checked > 0);
    }

    #[test]
    fn forced_double_fixed_point_is_caught() {
        let mut s = init_stage(1);
        s.add_generator(GenKind::Free, &[(2, 2), (3, 3)]).unwrap();
        let r = check_invariants(&s, 1).unwrap();
        assert!(
            r.frobenius
                .iter()
                .any(|v| v.starts_with("n1 fixes 2 and 3")),
            "{r}"
        );
        assert!(!r.passed());
    }

    #[test]
    fn commuting_constraint_is_enforced() {
        let mut s = init_stage(1);
        // 0 -> 2 forces 1 -> 3, which clashes with 1 -> 2
        assert!(s
            .add_generator(GenKind::Commuting, &[(0, 2), (1, 2)])
            .is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let s = run(12, 3).unwrap();
        let text = s.to_snapshot();
        let back = Stage::from_snapshot(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_snapshot(), text);
        assert!(text.lines().any(|l| l == "join: 0 1 : 1"));
        assert!(matches!(
            Stage::from_snapshot("points: 4\nt: 0->1 1->0 2->3 3->2\nbogus line\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn cadence_only_changes_totalization_points() {
        let a = run_with_cadence(8, 1, 1).unwrap();
        let b = run_with_cadence(8, 1, 4).unwrap();
        assert!(check_invariants(&b, 2).unwrap().passed());
        assert_eq!(a.step_count(), b.step_count());
    }
}
