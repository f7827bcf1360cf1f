#![allow(dead_code)]

use sharptrans::nearfield::{build_affine_group, build_dickson_nearfield, build_field_nearfield};
use sharptrans::perm::{catalog, FiniteGroup, Permutation};
use sharptrans::projective::build_pgl;

/// The sharply 2-transitive groups used across the suites.
pub fn sharp2_corpus() -> Vec<(String, FiniteGroup)> {
    let mut out = Vec::new();
    for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
        let g = build_affine_group(&build_field_nearfield(q).unwrap()).unwrap();
        out.push((format!("AGL(1,{q})"), g));
    }
    let dk = build_affine_group(&build_dickson_nearfield(9).unwrap()).unwrap();
    out.push(("Dickson(9) affine".into(), dk));
    out.push(("S(3)".into(), catalog("S(3)").unwrap()));
    out.push(("A(4)".into(), catalog("A(4)").unwrap()));
    for q in [5u64, 7] {
        let g = build_pgl(q).unwrap();
        let n = q as usize;
        let pts: Vec<usize> = (0..n).collect();
        let stab = g.stabilizer(&[n]).unwrap().restrict(&pts).unwrap();
        out.push((format!("PGL(2,{q}) point stabilizer"), stab));
    }
    let m11 = catalog("M11").unwrap();
    let pts: Vec<usize> = (2..11).collect();
    let m9 = m11.stabilizer(&[0, 1]).unwrap().restrict(&pts).unwrap();
    out.push(("M11 two-point stabilizer".into(), m9));
    out
}

/// Every corpus group of order at most 500, plus groups that are not
/// sharply 2-transitive.
pub fn small_groups() -> Vec<(String, FiniteGroup)> {
    let mut out: Vec<(String, FiniteGroup)> = sharp2_corpus()
        .into_iter()
        .filter(|(_, g)| g.order() <= 500)
        .collect();
    for name in [
        "S(4)", "S(5)", "A(5)", "C(5)", "C(6)", "D(8)", "D(10)", "D(12)", "A(3)", "S(2)",
    ] {
        out.push((name.into(), catalog(name).unwrap()));
    }
    for q in [3u64, 4, 5, 7] {
        out.push((format!("PGL(2,{q})"), build_pgl(q).unwrap()));
    }
    out
}

/// All ordered tuples of `n` distinct points.
pub fn tuples(degree: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for t in &out {
            for p in 0..degree {
                if !t.contains(&p) {
                    let mut u = t.clone();
                    u.push(p);
                    next.push(u);
                }
            }
        }
        out = next;
    }
    out
}

/// Definitional test over every pair of tuples: `n`-transitive when each
/// target is hit, sharply so when each is hit exactly once.
pub fn tuple_oracle(g: &FiniteGroup, n: usize) -> (bool, bool) {
    if n > g.degree() {
        return (false, false);
    }
    let all = tuples(g.degree(), n);
    let mut transitive = true;
    let mut sharp = true;
    for a in &all {
        let mut hits: std::collections::HashMap<Vec<usize>, usize> = Default::default();
        for e in g.elements() {
            *hits
                .entry(a.iter().map(|&x| e.images()[x]).collect())
                .or_default() += 1;
        }
        transitive &= hits.len() == all.len();
        sharp &= hits.len() == all.len() && hits.values().all(|&c| c == 1);
    }
    (transitive, sharp)
}

fn raw_then(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().map(|&x| b[x]).collect()
}

fn raw_order(a: &[usize]) -> u64 {
    let id: Vec<usize> = (0..a.len()).collect();
    let mut p = a.to_vec();
    let mut k = 1;
    while p != id {
        p = raw_then(&p, a);
        k += 1;
    }
    k
}

/// Characteristic by direct scan: 2 if involutions move every point,
/// otherwise the set of element orders found in `J² ∖ {1}`.
pub fn characteristic_oracle(g: &FiniteGroup) -> Vec<u64> {
    let id: Vec<usize> = (0..g.degree()).collect();
    let j: Vec<&Permutation> = g
        .elements()
        .iter()
        .filter(|e| e.images() != id.as_slice() && raw_then(e.images(), e.images()) == id)
        .collect();
    if j.iter()
        .all(|e| (0..g.degree()).all(|x| e.images()[x] != x))
    {
        return vec![2];
    }
    let mut orders = std::collections::BTreeSet::new();
    for a in &j {
        for b in &j {
            let ab = raw_then(a.images(), b.images());
            if ab != id {
                orders.insert(raw_order(&ab));
            }
        }
    }
    orders.into_iter().collect()
}
