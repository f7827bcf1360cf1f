//! Involution invariants of finite sharply 2-transitive groups.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::field::is_prime;
use crate::perm::{FiniteGroup, Permutation};

/// `J`: the nontrivial elements squaring to the identity, in lexicographic order.
pub fn involutions(g: &FiniteGroup) -> Vec<Permutation> {
    g.elements()
        .iter()
        .filter(|e| e.is_involution())
        .cloned()
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPointMode {
    /// Every involution fixes exactly one point.
    UniqueFixedPoint,
    /// No involution fixes a point.
    FixedPointFree,
}

impl FixedPointMode {
    pub fn name(self) -> &'static str {
        match self {
            FixedPointMode::UniqueFixedPoint => "unique-fixed-point",
            FixedPointMode::FixedPointFree => "fixed-point-free",
        }
    }
}

fn require_sharp2(g: &FiniteGroup) -> Result<()> {
    if g.degree() < 2 || !g.is_sharply_n_transitive(2)? {
        return Err(Error::NotSharplyTransitive(2));
    }
    Ok(())
}

/// Either all involutions have a (necessarily unique) fixed point or none
/// has; anything else is reported as an integrity error.
pub fn fixed_point_mode(g: &FiniteGroup) -> Result<FixedPointMode> {
    require_sharp2(g)?;
    let counts: BTreeSet<usize> = involutions(g)
        .iter()
        .map(|t| t.fixed_points().len())
        .collect();
    match counts.into_iter().collect::<Vec<_>>()[..] {
        [0] => Ok(FixedPointMode::FixedPointFree),
        [1] => Ok(FixedPointMode::UniqueFixedPoint),
        ref other => Err(Error::Integrity(format!(
            "involutions have mixed fixed-point counts {other:?}"
        ))),
    }
}

/// The translation candidates through `t`: `tJ` when involutions have fixed
/// points, and `t(J ∪ {1})` when they are fixed-point-free (then `|J| = n−1`
/// and `t` itself is one of the translations).
pub fn translation_set(g: &FiniteGroup, t: &Permutation) -> Result<Vec<Permutation>> {
    let mut js = involutions(g);
    if fixed_point_mode(g)? == FixedPointMode::FixedPointFree {
        js.push(g.identity());
    }
    let set: BTreeSet<Permutation> = js.iter().map(|j| t.then(j)).collect();
    Ok(set.into_iter().collect())
}

/// Whether exactly one element of `set` maps `x` to `y`, for every `x, y`.
pub fn acts_regularly(set: &[Permutation], degree: usize) -> bool {
    let mut hits = vec![0usize; degree * degree];
    for g in set {
        for x in 0..degree {
            hits[x * degree + g.image(x)] += 1;
        }
    }
    hits.iter().all(|&h| h == 1)
}

/// All involutions are conjugate.
pub fn check_single_class(g: &FiniteGroup) -> Result<bool> {
    require_sharp2(g)?;
    let j = involutions(g);
    let Some(first) = j.first() else {
        return Ok(false);
    };
    Ok(g.conjugacy_class(first)? == j)
}

/// `t ↦ Fix(t)` is a bijection `J → X`, and every point stabilizer holds a
/// unique involution, central in that stabilizer.
pub fn fix_bijection_check(g: &FiniteGroup) -> Result<bool> {
    if fixed_point_mode(g)? == FixedPointMode::FixedPointFree {
        return Err(Error::CharacteristicTwo(
            "involutions are fixed-point-free, there is no fixed-point map".into(),
        ));
    }
    let j = involutions(g);
    let fixed: BTreeSet<usize> = j.iter().map(|t| t.fixed_points()[0]).collect();
    if j.len() != g.degree() || fixed.len() != g.degree() {
        return Ok(false);
    }
    for x in 0..g.degree() {
        let stab = g.stabilizer(&[x])?;
        let local: Vec<&Permutation> = stab
            .elements()
            .iter()
            .filter(|e| e.is_involution())
            .collect();
        let [t] = local[..] else {
            return Ok(false);
        };
        if !stab.elements().iter().all(|h| h.then(t) == t.then(h)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `J² ∖ {1}` in lexicographic order.
pub fn j_squared_nontrivial(g: &FiniteGroup) -> Vec<Permutation> {
    let j = involutions(g);
    let mut set = BTreeSet::new();
    for a in &j {
        for b in &j {
            let ab = a.then(b);
            if !ab.is_identity() {
                set.insert(ab);
            }
        }
    }
    set.into_iter().collect()
}

/// 2 when involutions are fixed-point-free, otherwise the common order of
/// the elements of `J² ∖ {1}`, which must be prime.
pub fn characteristic(g: &FiniteGroup) -> Result<u64> {
    if fixed_point_mode(g)? == FixedPointMode::FixedPointFree {
        return Ok(2);
    }
    let orders: BTreeSet<u64> = j_squared_nontrivial(g)
        .iter()
        .map(Permutation::order)
        .collect();
    match orders.into_iter().collect::<Vec<_>>()[..] {
        [p] if is_prime(p) => Ok(p),
        ref other => Err(Error::Integrity(format!(
            "elements of J^2 \\ {{1}} have orders {other:?}, expected one prime"
        ))),
    }
}

/// Outcome of Neumann's splitting criterion.
#[derive(Clone, Debug)]
pub struct SplitTest {
    /// The lexicographically least involution, used as `t`.
    pub t: Permutation,
    pub split: bool,
    /// The regular normal subgroup `N = tJ = J²` when split.
    pub normal: Option<FiniteGroup>,
}

/// `G` splits iff the translation set through `t` is closed under
/// composition. When it is, the set is checked to equal `J²` and to be a
/// regular, abelian, normal subgroup.
pub fn neumann_split_test(g: &FiniteGroup) -> Result<SplitTest> {
    require_sharp2(g)?;
    let t = involutions(g)
        .into_iter()
        .next()
        .ok_or_else(|| Error::Integrity("sharply 2-transitive group without involutions".into()))?;
    let tj = translation_set(g, &t)?;
    let lookup: HashSet<&Permutation> = tj.iter().collect();
    let split = tj
        .iter()
        .all(|a| tj.iter().all(|b| lookup.contains(&a.then(b))));
    if !split {
        return Ok(SplitTest {
            t,
            split,
            normal: None,
        });
    }
    let n = FiniteGroup::from_elements(g.degree(), tj.clone())?;
    let mut j2: BTreeSet<Permutation> = j_squared_nontrivial(g).into_iter().collect();
    j2.insert(g.identity());
    // on two points J² = {1} while N = {1, t}
    if g.degree() > 2 && j2.into_iter().collect::<Vec<_>>() != n.elements() {
        return Err(Error::Integrity(
            "tJ is a subgroup but differs from J^2".into(),
        ));
    }
    if !n.is_regular() || !n.is_abelian() || !g.is_normal_subgroup(&n) {
        return Err(Error::Integrity(
            "tJ is a subgroup but not a regular abelian normal subgroup".into(),
        ));
    }
    Ok(SplitTest {
        t,
        split,
        normal: Some(n),
    })
}

/// `J² ∖ {1}` forms a single conjugacy class.
pub fn j_squared_class_check(g: &FiniteGroup) -> Result<bool> {
    if fixed_point_mode(g)? == FixedPointMode::FixedPointFree {
        return Err(Error::CharacteristicTwo(
            "the single-class property can fail here; see the free-product witness".into(),
        ));
    }
    let j2 = j_squared_nontrivial(g);
    let Some(first) = j2.first() else {
        return Ok(false);
    };
    Ok(g.conjugacy_class(first)? == j2)
}

/// Aggregated involution data for a sharply 2-transitive group.
#[derive(Clone, Debug)]
pub struct InvolutionReport {
    pub degree: usize,
    pub order: usize,
    pub involutions: Vec<Permutation>,
    pub single_class: bool,
    pub fixed_point_mode: FixedPointMode,
    /// Present only when involutions have fixed points.
    pub fix_bijection: Option<bool>,
    /// Present only when involutions have fixed points.
    pub j_squared_single_class: Option<bool>,
    /// A prime for every finite input; 0 is reserved for infinite groups.
    pub characteristic: u64,
    pub split: bool,
    pub regular_normal: Option<FiniteGroup>,
}

pub fn analyze(g: &FiniteGroup) -> Result<InvolutionReport> {
    require_sharp2(g)?;
    let mode = fixed_point_mode(g)?;
    let (fix_bijection, j_squared_single_class) = match mode {
        FixedPointMode::UniqueFixedPoint => (
            Some(fix_bijection_check(g)?),
            Some(j_squared_class_check(g)?),
        ),
        FixedPointMode::FixedPointFree => (None, None),
    };
    let split = neumann_split_test(g)?;
    let report = InvolutionReport {
        degree: g.degree(),
        order: g.order(),
        involutions: involutions(g),
        single_class: check_single_class(g)?,
        fixed_point_mode: mode,
        fix_bijection,
        j_squared_single_class,
        characteristic: characteristic(g)?,
        split: split.split,
        regular_normal: split.normal,
    };
    if report.split != report.regular_normal.is_some() {
        return Err(Error::Integrity("split flag disagrees with N".into()));
    }
    if !report.split {
        return Err(Error::Integrity(
            "finite sharply 2-transitive group did not split".into(),
        ));
    }
    Ok(report)
}

fn opt(b: Option<bool>) -> String {
    b.map_or_else(|| "n/a".to_string(), |b| b.to_string())
}

impl fmt::Display for InvolutionReport {
    /// Stable `key: value` lines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "degree: {}", self.degree)?;
        writeln!(f, "order: {}", self.order)?;
        writeln!(f, "involutions: {}", self.involutions.len())?;
        writeln!(f, "single_class: {}", self.single_class)?;
        writeln!(f, "fixed_point_mode: {}", self.fixed_point_mode.name())?;
        writeln!(f, "fix_bijection: {}", opt(self.fix_bijection))?;
        writeln!(
            f,
            "j_squared_single_class: {}",
            opt(self.j_squared_single_class)
        )?;
        writeln!(f, "characteristic: {}", self.characteristic)?;
        writeln!(f, "split: {}", self.split)?;
        match &self.regular_normal {
            Some(n) => {
                writeln!(f, "regular_normal_order: {}", n.order())?;
                writeln!(f, "regular_normal_abelian: {}", n.is_abelian())
            }
            None => writeln!(f, "regular_normal_order: none"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nearfield::{build_affine_group, build_dickson_nearfield, build_field_nearfield};
    use crate::perm::catalog;

    fn agl(q: u64) -> FiniteGroup {
        build_affine_group(&build_field_nearfield(q).unwrap()).unwrap()
    }

    fn dickson9() -> FiniteGroup {
        build_affine_group(&build_dickson_nearfield(9).unwrap()).unwrap()
    }

    #[test]
    fn involution_counts() {
        assert_eq!(involutions(&catalog("S(3)").unwrap()).len(), 3);
        assert_eq!(involutions(&catalog("A(4)").unwrap()).len(), 3);
        assert!(involutions(&catalog("C(3)").unwrap()).is_empty());
    }

    #[test]
    fn single_class() {
        assert!(check_single_class(&agl(5)).unwrap());
        assert!(check_single_class(&catalog("A(4)").unwrap()).unwrap());
        assert!(check_single_class(&dickson9()).unwrap());
        assert_eq!(
            check_single_class(&catalog("S(4)").unwrap()),
            Err(Error::NotSharplyTransitive(2))
        );
    }

    #[test]
    fn fix_bijection() {
        for q in [5, 7, 9] {
            assert!(fix_bijection_check(&agl(q)).unwrap(), "q={q}");
        }
        assert!(matches!(
            fix_bijection_check(&catalog("A(4)").unwrap()),
            Err(Error::CharacteristicTwo(_))
        ));
    }

    #[test]
    fn characteristics() {
        assert_eq!(characteristic(&catalog("A(4)").unwrap()).unwrap(), 2);
        assert_eq!(characteristic(&agl(5)).unwrap(), 5);
        assert_eq!(characteristic(&dickson9()).unwrap(), 3);
        assert_eq!(characteristic(&agl(8)).unwrap(), 2);
        assert_eq!(characteristic(&catalog("S(3)").unwrap()).unwrap(), 3);
    }

    #[test]
    fn splitting() {
        let s = neumann_split_test(&agl(5)).unwrap();
        assert!(s.split);
        let n = s.normal.unwrap();
        assert_eq!(n.order(), 5);
        // the translations x -> x + b
        let translations: Vec<Permutation> = (0..5)
            .map(|b| Permutation::new((0..5).map(|x| (x + b) % 5).collect()).unwrap())
            .collect();
        assert!(translations.iter().all(|t| n.contains(t)));

        let v4 = neumann_split_test(&catalog("A(4)").unwrap())
            .unwrap()
            .normal
            .unwrap();
        assert_eq!(v4.order(), 4);

        let n9 = neumann_split_test(&dickson9()).unwrap().normal.unwrap();
        assert_eq!(n9.order(), 9);
        assert!(n9.elements().iter().all(|e| e.order() <= 3));
    }

    #[test]
    fn j_squared_classes() {
        for g in [agl(5), agl(7), dickson9()] {
            assert!(j_squared_class_check(&g).unwrap());
        }
        assert!(matches!(
            j_squared_class_check(&catalog("A(4)").unwrap()),
            Err(Error::CharacteristicTwo(_))
        ));
    }

    #[test]
    fn translation_set_is_regular() {
        for g in [agl(3), agl(4), agl(5), agl(8), dickson9()] {
            for t in involutions(&g) {
                let tj = translation_set(&g, &t).unwrap();
                assert!(acts_regularly(&tj, g.degree()));
            }
        }
    }

    #[test]
    fn reports() {
        let r = analyze(&agl(5)).unwrap();
        assert_eq!(r.involutions.len(), 5);
        assert!(r.single_class && r.split);
        assert_eq!(r.fixed_point_mode, FixedPointMode::UniqueFixedPoint);
        assert_eq!(r.characteristic, 5);

        let r = analyze(&catalog("A(4)").unwrap()).unwrap();
        assert_eq!(r.involutions.len(), 3);
        assert_eq!(r.fixed_point_mode, FixedPointMode::FixedPointFree);
        assert_eq!(r.characteristic, 2);
        assert_eq!(r.fix_bijection, None);

        let r = analyze(&dickson9()).unwrap();
        assert_eq!(r.involutions.len(), 9);
        assert_eq!(r.characteristic, 3);
        assert_eq!(r.regular_normal.as_ref().unwrap().order(), 9);
        let text = r.to_string();
        assert_eq!(
            text,
            "degree: 9\norder: 72\ninvolutions: 9\nsingle_class: true\n\
             fixed_point_mode: unique-fixed-point\nfix_bijection: true\n\
             j_squared_single_class: true\ncharacteristic: 3\nsplit: true\n\
             regular_normal_order: 9\nregular_normal_abelian: true\n"
        );
    }
}
