mod common;

use proptest::prelude::*;
use sharptrans::analysis::{characteristic, neumann_split_test};
use sharptrans::free_product::*;
use sharptrans::nearfield::{extract_near_domain, Orientation};
use sharptrans::perm::{generate_group, Permutation};

fn letter() -> impl Strategy<Value = i32> {
    prop_oneof![1..=3i32, -3..=-1i32]
}

fn syllable() -> impl Strategy<Value = Syllable> {
    prop_oneof![
        (any::<bool>(), prop::collection::vec(letter(), 0..3)).prop_map(
            |(flip, word)| Syllable::A(ASyllable {
                flip,
                word: free_reduce(&word)
            })
        ),
        prop::collection::vec(letter(), 1..3).prop_map(|w| Syllable::N(free_reduce(&w))),
    ]
}

fn word() -> impl Strategy<Value = FPWord> {
    prop::collection::vec(syllable(), 0..=6).prop_map(FPWord::from_syllables)
}

fn is_normal_form(w: &FPWord) -> bool {
    let s = w.syllables();
    s.iter().all(|x| !x.is_trivial()) && s.windows(2).all(|p| !p[0].same_factor(&p[1]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn multiplication_is_associative(u in word(), v in word(), w in word()) {
        let left = fp_multiply(&fp_multiply(&u, &v), &w);
        let right = fp_multiply(&u, &fp_multiply(&v, &w));
        prop_assert!(is_normal_form(&left));
        prop_assert_eq!(left, right);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn identity_and_inverses(u in word()) {
        let e = FPWord::identity();
        prop_assert_eq!(fp_multiply(&u, &e), u.clone());
        prop_assert_eq!(fp_multiply(&e, &u), u.clone());
        prop_assert!(fp_multiply(&u, &fp_invert(&u)).is_identity());
        prop_assert!(fp_multiply(&fp_invert(&u), &u).is_identity());
        prop_assert_eq!(fp_invert(&fp_invert(&u)), u);
    }

    #[test]
    fn printing_round_trips(u in word()) {
        let back: FPWord = u.to_string().parse().unwrap();
        prop_assert_eq!(back, u);
    }

    #[test]
    fn torsion_is_conjugate_to_t(g in word(), pick in 0..5usize, x in word()) {
        let base = match pick {
            0 => FPWord::t(),
            1 => "t c1".parse().unwrap(),
            2 => FPWord::n(1),
            3 => "t n1".parse().unwrap(),
            _ => x,
        };
        let u = fp_conjugate(&base, &g);
        prop_assume!(!u.is_identity());
        prop_assert_eq!(fp_is_involution(&u), fp_conjugacy_test(&u, &FPWord::t()));
    }

    #[test]
    fn conjugacy_is_invariant_under_conjugation(u in word(), g in word(), h in word()) {
        let a = fp_conjugate(&u, &g);
        let b = fp_conjugate(&u, &h);
        prop_assert!(fp_conjugacy_test(&a, &b));
        prop_assert!(fp_conjugacy_test(&a, &u));
    }

    #[test]
    fn cyclic_reduction_is_conjugate(u in word()) {
        let r = u.cyclically_reduce();
        prop_assert!(r.syllable_len() <= u.syllable_len());
        prop_assert!(fp_conjugacy_test(&r, &u));
        let n = r.syllable_len();
        prop_assert!(n <= 1 || (n % 2 == 0 && !r.syllables()[0].same_factor(&r.syllables()[n - 1])));
    }

    #[test]
    fn tj_membership_matches_definition(g in word()) {
        let j = fp_conjugate(&FPWord::t(), &g);
        prop_assert!(fp_in_tj(&fp_multiply(&FPWord::t(), &j)));
    }
}

#[test]
fn commuting_generators_commute_with_t() {
    let t = FPWord::t();
    for k in 1..=5 {
        for c in [FPWord::c(k), fp_invert(&FPWord::c(k))] {
            assert_eq!(fp_multiply(&t, &c), fp_multiply(&c, &t));
        }
        let n = FPWord::n(k);
        assert_ne!(fp_multiply(&t, &n), fp_multiply(&n, &t));
    }
}

#[test]
fn characteristic_matches_order_scan() {
    for (name, g) in common::sharp2_corpus() {
        let oracle = common::characteristic_oracle(&g);
        assert_eq!(oracle.len(), 1, "{name}: orders {oracle:?}");
        assert_eq!(characteristic(&g).unwrap(), oracle[0], "{name}");
    }
}

#[test]
fn sharp_transitivity_matches_tuple_oracle() {
    for (name, g) in common::small_groups() {
        for n in 1..=g.degree().min(4) {
            let (trans, sharp) = common::tuple_oracle(&g, n);
            assert_eq!(g.is_n_transitive(n).unwrap(), trans, "{name} n={n}");
            assert_eq!(g.is_sharply_n_transitive(n).unwrap(), sharp, "{name} n={n}");
        }
    }
}

fn perm_on(degree: usize) -> impl Strategy<Value = Permutation> {
    Just((0..degree).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_groups_match_tuple_oracle(
        degree in 2..=6usize,
        seeds in prop::collection::vec(any::<prop::sample::Index>(), 1..3),
    ) {
        let all: Vec<Vec<usize>> = common::tuples(degree, degree);
        let gens: Vec<Permutation> = seeds
            .iter()
            .map(|i| Permutation::new(i.get(&all).clone()).unwrap())
            .collect();
        let g = match generate_group(&gens, 500) {
            Ok(g) => g,
            Err(_) => return Ok(()),
        };
        for n in 1..=degree.min(3) {
            let (trans, sharp) = common::tuple_oracle(&g, n);
            prop_assert_eq!(g.is_n_transitive(n).unwrap(), trans);
            prop_assert_eq!(g.is_sharply_n_transitive(n).unwrap(), sharp);
        }
    }

    #[test]
    fn conjugation_is_a_right_action(a in perm_on(6), b in perm_on(6), x in perm_on(6)) {
        prop_assert_eq!(x.conjugate_by(&a).conjugate_by(&b), x.conjugate_by(&a.then(&b)));
    }
}

#[test]
fn neumann_holds_across_corpus() {
    for (name, g) in common::sharp2_corpus() {
        let split = neumann_split_test(&g).unwrap_or_else(|e| panic!("{name}: {e}"));
        let n = split.normal.expect(&name);
        assert!(
            n.is_abelian() && n.is_regular() && g.is_normal_subgroup(&n),
            "{name}"
        );
        let d = extract_near_domain(&g, 0, 1, Orientation::CANONICAL).unwrap();
        assert!(d.is_additively_commutative(), "{name}");
    }
}
