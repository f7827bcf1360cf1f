//! Finite permutation groups held as explicit element sets.
//!
//! Points are `0..degree` and the action is a right action: `x^(ab) = (x^a)^b`,
//! so `a.then(&b)` first applies `a` and then `b`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Default bound on closure enumeration.
pub const DEFAULT_CAP: usize = 100_000;

/// A bijection of `0..degree`, stored as its image table.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree).collect(),
        }
    }

    /// Builds a permutation from its image table, rejecting non-bijections.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("degree must be positive".into()));
        }
        let mut seen = vec![false; n];
        for &y in &images {
            if y >= n || seen[y] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection of 0..{n}"
                )));
            }
            seen[y] = true;
        }
        Ok(Permutation { images })
    }

    /// Builds a permutation from disjoint cycles, e.g. `&[&[0, 1], &[2, 3]]`.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= degree {
                    return Err(Error::PointOutOfRange { point: x, degree });
                }
                if touched[x] {
                    return Err(Error::InvalidPermutation(format!(
                        "point {x} appears twice in cycles"
                    )));
                }
                touched[x] = true;
                images[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Permutation::new(images)
    }

    pub(crate) fn from_images_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(images.clone()).is_ok());
        Permutation { images }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// The image `x^self`.
    pub fn image(&self, x: usize) -> usize {
        self.images[x]
    }

    /// `self` followed by `other`. Degrees must agree.
    pub fn then(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        Permutation {
            images: self.images.iter().map(|&x| other.images[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y] = x;
        }
        Permutation { images: inv }
    }

    /// `h⁻¹ · self · h`.
    pub fn conjugate_by(&self, h: &Permutation) -> Permutation {
        h.inverse().then(self).then(h)
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(x, &y)| x == y)
    }

    pub fn is_involution(&self) -> bool {
        !self.is_identity() && self.then(self).is_identity()
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.degree())
            .filter(|&x| self.images[x] == x)
            .collect()
    }

    pub fn pow(&self, mut e: u64) -> Permutation {
        let mut base = self.clone();
        let mut acc = Permutation::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&base);
            }
            base = base.then(&base);
            e >>= 1;
        }
        acc
    }

    /// Order as the lcm of cycle lengths.
    pub fn order(&self) -> u64 {
        self.cycles()
            .iter()
            .fold(1u64, |acc, c| lcm(acc, c.len() as u64))
    }

    /// Disjoint cycle decomposition, singletons included, each cycle starting
    /// at its least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let body: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Composition under the right-action convention: `x^(ab) = (x^a)^b`.
pub fn compose(a: &Permutation, b: &Permutation) -> Result<Permutation> {
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch(a.degree(), b.degree()));
    }
    Ok(a.then(b))
}

/// `degree · (degree−1) ··· (degree−n+1)`.
pub fn falling_factorial(degree: usize, n: usize) -> usize {
    (0..n).map(|i| degree - i).product()
}

/// Closure of `gens` by right multiplication, starting from the identity.
fn closure(degree: usize, gens: &[Permutation], cap: usize) -> Result<Vec<Permutation>> {
    let id = Permutation::identity(degree);
    let mut seen: HashSet<Permutation> = HashSet::new();
    let mut out = vec![id.clone()];
    seen.insert(id.clone());
    let mut queue = VecDeque::from([id]);
    while let Some(e) = queue.pop_front() {
        for g in gens {
            let h = e.then(g);
            if !seen.contains(&h) {
                if seen.len() >= cap {
                    return Err(Error::CapExceeded {
                        cap,
                        partial: seen.len(),
                    });
                }
                seen.insert(h.clone());
                out.push(h.clone());
                queue.push_back(h);
            }
        }
    }
    Ok(out)
}

/// A permutation group together with its complete element list.
#[derive(Clone)]
pub struct FiniteGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
    label: Option<String>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("label", &self.label)
            .field("degree", &self.degree)
            .field("order", &self.order())
            .field("generators", &self.generators)
            .finish()
    }
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.elements == other.elements
    }
}

impl Eq for FiniteGroup {}

/// Enumerates the group generated by `gens`, failing once more than `cap`
/// elements appear.
pub fn generate_group(gens: &[Permutation], cap: usize) -> Result<FiniteGroup> {
    let first = gens
        .first()
        .ok_or_else(|| Error::Precondition("generator list is empty".into()))?;
    let degree = first.degree();
    if let Some(bad) = gens.iter().find(|g| g.degree() != degree) {
        return Err(Error::DegreeMismatch(degree, bad.degree()));
    }
    let elements = closure(degree, gens, cap)?;
    Ok(FiniteGroup::assemble(degree, gens.to_vec(), elements))
}

impl FiniteGroup {
    fn assemble(
        degree: usize,
        generators: Vec<Permutation>,
        mut elements: Vec<Permutation>,
    ) -> Self {
        elements.sort();
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        FiniteGroup {
            degree,
            generators,
            elements,
            index,
            label: None,
        }
    }

    /// The trivial group on `degree` points.
    pub fn trivial(degree: usize) -> Self {
        let id = Permutation::identity(degree);
        FiniteGroup::assemble(degree, vec![id.clone()], vec![id])
    }

    /// Wraps a set of permutations that must already form a group. A small
    /// generating set is picked greedily; the set is rejected if its closure
    /// differs from it.
    pub fn from_elements(degree: usize, elements: Vec<Permutation>) -> Result<Self> {
        let set: HashSet<Permutation> = elements.into_iter().collect();
        if let Some(bad) = set.iter().find(|g| g.degree() != degree) {
            return Err(Error::DegreeMismatch(degree, bad.degree()));
        }
        let mut sorted: Vec<Permutation> = set.iter().cloned().collect();
        sorted.sort();
        let mut gens: Vec<Permutation> = Vec::new();
        let mut current: HashSet<Permutation> = HashSet::from([Permutation::identity(degree)]);
        for e in &sorted {
            if current.contains(e) {
                continue;
            }
            gens.push(e.clone());
            let grown = closure(degree, &gens, set.len() + 1)?;
            current = grown.into_iter().collect();
            if current.len() > set.len() {
                break;
            }
        }
        if current != set {
            return Err(Error::Integrity(format!(
                "element set of size {} is not closed (closure has {} elements)",
                set.len(),
                current.len()
            )));
        }
        if gens.is_empty() {
            gens.push(Permutation::identity(degree));
        }
        Ok(FiniteGroup::assemble(degree, gens, sorted))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// All elements in lexicographic order of their image tables.
    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        self.index.contains_key(g)
    }

    pub fn identity(&self) -> Permutation {
        Permutation::identity(self.degree)
    }

    pub fn is_abelian(&self) -> bool {
        self.generators
            .iter()
            .all(|a| self.generators.iter().all(|b| a.then(b) == b.then(a)))
    }

    fn check_tuple_len(&self, n: usize) -> Result<()> {
        if n > self.degree {
            return Err(Error::TupleTooLong {
                n,
                degree: self.degree,
            });
        }
        Ok(())
    }

    /// Number of distinct images of the base tuple `(0, 1, …, n−1)`.
    fn base_tuple_orbit_len(&self, n: usize) -> usize {
        let orbit: HashSet<&[usize]> = self.elements.iter().map(|g| &g.images[..n]).collect();
        orbit.len()
    }

    /// Whether every ordered n-tuple of distinct points can be moved to every
    /// other. Since the group acts on tuples, it suffices that the orbit of a
    /// single base tuple contains all of them.
    pub fn is_n_transitive(&self, n: usize) -> Result<bool> {
        self.check_tuple_len(n)?;
        Ok(self.base_tuple_orbit_len(n) == falling_factorial(self.degree, n))
    }

    pub fn is_sharply_n_transitive(&self, n: usize) -> Result<bool> {
        Ok(self.is_n_transitive(n)? && self.order() == falling_factorial(self.degree, n))
    }

    pub fn is_transitive(&self) -> bool {
        self.degree == 0 || self.is_n_transitive(1).unwrap_or(false)
    }

    /// Transitive with trivial point stabilizers.
    pub fn is_regular(&self) -> bool {
        self.is_transitive() && self.order() == self.degree
    }

    /// Pointwise stabilizer of `points`, on the same point set.
    pub fn stabilizer(&self, points: &[usize]) -> Result<FiniteGroup> {
        for &p in points {
            if p >= self.degree {
                return Err(Error::PointOutOfRange {
                    point: p,
                    degree: self.degree,
                });
            }
        }
        let elements: Vec<Permutation> = self
            .elements
            .iter()
            .filter(|g| points.iter().all(|&p| g.image(p) == p))
            .cloned()
            .collect();
        FiniteGroup::from_elements(self.degree, elements)
    }

    /// Induced action on an invariant subset; point `points[i]` becomes `i`.
    pub fn restrict(&self, points: &[usize]) -> Result<FiniteGroup> {
        let mut relabel = vec![usize::MAX; self.degree];
        for (i, &p) in points.iter().enumerate() {
            if p >= self.degree {
                return Err(Error::PointOutOfRange {
                    point: p,
                    degree: self.degree,
                });
            }
            relabel[p] = i;
        }
        let mut elements = Vec::with_capacity(self.order());
        for g in &self.elements {
            let mut images = Vec::with_capacity(points.len());
            for &p in points {
                let q = relabel[g.image(p)];
                if q == usize::MAX {
                    return Err(Error::Precondition(format!(
                        "point set is not invariant: {p} maps outside it"
                    )));
                }
                images.push(q);
            }
            elements.push(Permutation::new(images)?);
        }
        FiniteGroup::from_elements(points.len(), elements)
    }

    /// `{h⁻¹gh : h ∈ G}` in lexicographic order.
    pub fn conjugacy_class(&self, g: &Permutation) -> Result<Vec<Permutation>> {
        if !self.contains(g) {
            return Err(Error::NotInGroup);
        }
        let class: BTreeSet<Permutation> =
            self.elements.iter().map(|h| g.conjugate_by(h)).collect();
        Ok(class.into_iter().collect())
    }

    /// All conjugacy classes, ordered by their least element.
    pub fn conjugacy_classes(&self) -> Vec<Vec<Permutation>> {
        let mut assigned = vec![false; self.order()];
        let mut classes = Vec::new();
        for (i, g) in self.elements.iter().enumerate() {
            if assigned[i] {
                continue;
            }
            let class = self.conjugacy_class(g).expect("element of the group");
            for c in &class {
                assigned[self.index[c]] = true;
            }
            classes.push(class);
        }
        classes
    }

    /// Transitive, not regular, and no nontrivial element fixes two points.
    pub fn is_frobenius(&self) -> bool {
        self.is_transitive()
            && self.order() > self.degree
            && self
                .elements
                .iter()
                .filter(|g| !g.is_identity())
                .all(|g| g.fixed_points().len() <= 1)
    }

    /// Whether `h` is a normal subgroup of this group.
    pub fn is_normal_subgroup(&self, h: &FiniteGroup) -> bool {
        h.elements.iter().all(|e| self.contains(e))
            && self
                .generators
                .iter()
                .all(|g| h.generators.iter().all(|e| h.contains(&e.conjugate_by(g))))
    }

    /// Looks for a normal subgroup acting regularly on the points.
    ///
    /// Every normal subgroup is generated by the classes it contains, so the
    /// search walks joins of class-generated subgroups, keeping only those
    /// whose order divides the degree.
    pub fn find_regular_normal_subgroup(&self) -> Result<Option<FiniteGroup>> {
        let degree = self.degree;
        if !self.order().is_multiple_of(degree) {
            return Ok(None);
        }
        let n = self.order();
        let to_mask = |elems: &[Permutation]| -> Vec<bool> {
            let mut m = vec![false; n];
            for e in elems {
                m[self.index[e]] = true;
            }
            m
        };
        let mut found: BTreeSet<Vec<bool>> = BTreeSet::new();
        for class in self.conjugacy_classes() {
            if class[0].is_identity() {
                continue;
            }
            let Ok(elems) = closure(degree, &class, degree + 1) else {
                continue;
            };
            if degree.is_multiple_of(elems.len()) {
                found.insert(to_mask(&elems));
            }
        }
        let mut frontier: Vec<Vec<bool>> = found.iter().cloned().collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            let base: Vec<Vec<bool>> = found.iter().cloned().collect();
            for a in &frontier {
                for b in &base {
                    if let Some(j) = self.join_normal(a, b, degree) {
                        if !found.contains(&j) {
                            found.insert(j.clone());
                            next.push(j);
                        }
                    }
                }
            }
            frontier = next;
        }
        for mask in found.iter().rev() {
            let size = mask.iter().filter(|&&b| b).count();
            if size != degree {
                continue;
            }
            let elems: Vec<Permutation> = mask
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| self.elements[i].clone())
                .collect();
            let sub = FiniteGroup::from_elements(degree, elems)?;
            if sub.is_transitive() {
                return Ok(Some(sub));
            }
        }
        Ok(None)
    }

    /// Product `AB` of two normal subgroups, if its order divides `degree`.
    fn join_normal(&self, a: &[bool], b: &[bool], degree: usize) -> Option<Vec<bool>> {
        let ea: Vec<&Permutation> = (0..a.len())
            .filter(|&i| a[i])
            .map(|i| &self.elements[i])
            .collect();
        let eb: Vec<&Permutation> = (0..b.len())
            .filter(|&i| b[i])
            .map(|i| &self.elements[i])
            .collect();
        let mut m = vec![false; a.len()];
        let mut count = 0;
        for x in &ea {
            for y in &eb {
                let i = self.index[&x.then(y)];
                if !m[i] {
                    m[i] = true;
                    count += 1;
                    if count > degree {
                        return None;
                    }
                }
            }
        }
        degree.is_multiple_of(count).then_some(m)
    }
}

/// Named groups: `S(n)`, `A(n)`, `C(n)`, `D(2n)` (on `n` points), `M11`.
pub fn catalog(name: &str) -> Result<FiniteGroup> {
    let unknown = || Error::UnknownGroup(name.to_string());
    let trimmed = name.trim();
    if trimmed == "M11" {
        return mathieu_11();
    }
    let (kind, rest) = trimmed.split_at(1);
    let arg: usize = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .and_then(|r| r.trim().parse().ok())
        .ok_or_else(unknown)?;
    let group = match kind {
        "S" => symmetric(arg)?,
        "A" => alternating(arg)?,
        "C" => cyclic(arg)?,
        "D" => {
            if !arg.is_multiple_of(2) || arg < 6 {
                return Err(Error::Unsupported(format!(
                    "dihedral order {arg} must be even and at least 6"
                )));
            }
            dihedral(arg / 2)?
        }
        _ => return Err(unknown()),
    };
    Ok(group.with_label(trimmed))
}

fn long_cycle(n: usize) -> Permutation {
    Permutation::from_images_unchecked((0..n).map(|x| (x + 1) % n).collect())
}

fn symmetric(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::Unsupported("S(0)".into()));
    }
    if n == 1 {
        return Ok(FiniteGroup::trivial(1));
    }
    let swap = Permutation::from_cycles(n, &[&[0, 1]])?;
    generate_group(&[swap, long_cycle(n)], DEFAULT_CAP)
}

fn alternating(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::Unsupported("A(0)".into()));
    }
    if n < 3 {
        return Ok(FiniteGroup::trivial(n));
    }
    let gens: Vec<Permutation> = (2..n)
        .map(|i| Permutation::from_cycles(n, &[&[0, 1, i]]))
        .collect::<Result<_>>()?;
    generate_group(&gens, DEFAULT_CAP)
}

fn cyclic(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::Unsupported("C(0)".into()));
    }
    generate_group(&[long_cycle(n)], DEFAULT_CAP)
}

fn dihedral(n: usize) -> Result<FiniteGroup> {
    let reflection = Permutation::new((0..n).map(|x| (n - x) % n).collect())?;
    generate_group(&[long_cycle(n), reflection], DEFAULT_CAP)
}

/// M11 from an 11-cycle and `(2 6 10 7)(3 9 4 5)`, validated to order 7920.
fn mathieu_11() -> Result<FiniteGroup> {
    let a = long_cycle(11);
    let b = Permutation::from_cycles(11, &[&[2, 6, 10, 7], &[3, 9, 4, 5]])?;
    let g = generate_group(&[a, b], 7920)?;
    if g.order() != 7920 {
        return Err(Error::OrderMismatch {
            name: "M11".into(),
            expected: 7920,
            actual: g.order(),
        });
    }
    Ok(g.with_label("M11"))
}
