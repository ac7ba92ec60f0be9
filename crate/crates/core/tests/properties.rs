use num_complex::Complex64;
use num_traits::One;
use proptest::prelude::*;
use rand::Rng;

use wps::characters::Mobius;
use wps::conjugacy::finite::{exhaustive_isomorphism, find_graph_conjugacy_finite};
use wps::conjugacy::{conjugate_system, Gamma};
use wps::correspondence::{tensor_power_norm_sq, Multiplier, Quiver};
use wps::fock::{matrix, series_product, FockSpace};
use wps::io::{system_from_value, system_to_json};
use wps::rational::{fmt_rational, parse_rational, ratio, Rational};
use wps::wps::{FiniteSystem, Wps};
use wps::random;

fn edges(s: &FiniteSystem) -> Vec<(usize, usize)> {
    s.graph().into_keys().collect()
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rationals_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let x = ratio(n, d);
        prop_assert_eq!(parse_rational(&fmt_rational(&x)).unwrap(), x);
    }

    #[test]
    fn systems_round_trip_through_json(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let finite = Wps::Finite(random::finite_system(&mut rng, 6, 3));
        prop_assert_eq!(system_from_value(&system_to_json(&finite)).unwrap(), finite);
        let interval = Wps::Interval(random::interval_system(&mut rng));
        prop_assert_eq!(system_from_value(&system_to_json(&interval)).unwrap(), interval);
    }

    #[test]
    fn relabeling_is_found_and_undone(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let n = rng.gen_range(1..=6);
        let a = random::matrix_system(&mut rng, n, 0.4);
        let perm = random::permutation(&mut rng, n);
        let b = random::relabel_reweight(&mut rng, &a, &perm);
        let found = find_graph_conjugacy_finite(&a, &b).unwrap().expect("relabeled graphs are isomorphic");
        let back = conjugate_system(&Wps::Finite(b.clone()), &Gamma::Bijection(found), &Wps::Finite(a.clone()).space()).unwrap();
        prop_assert_eq!(edges(back.as_finite().unwrap()), edges(&a));
        let exact = conjugate_system(&Wps::Finite(b), &Gamma::Bijection(perm), &Wps::Finite(a.clone()).space()).unwrap();
        prop_assert_eq!(edges(exact.as_finite().unwrap()), edges(&a));
    }

    #[test]
    fn backtracking_agrees_with_brute_force(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let n = rng.gen_range(1..=5);
        let a = random::matrix_system(&mut rng, n, 0.4);
        let b = random::matrix_system(&mut rng, n, 0.4);
        prop_assert_eq!(find_graph_conjugacy_finite(&a, &b).unwrap().is_some(), exhaustive_isomorphism(&a, &b).is_some());
    }

    #[test]
    fn normalized_systems_are_markov(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let s = random::finite_system(&mut rng, 6, 3);
        if !s.is_well_supported() {
            prop_assert!(s.normalize().is_err());
            return Ok(());
        }
        let ones = vec![Rational::one(); s.len()];
        let p = s.normalize().unwrap().positive_operator(&ones).unwrap();
        prop_assert!(p.iter().all(One::is_one));
    }

    #[test]
    fn tensor_powers_are_submultiplicative(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let q = Quiver::new(&random::finite_system(&mut rng, 5, 3));
        let u = q.edges.iter().map(|_| random::positive_rational(&mut rng)).collect();
        let h = q.edges.iter().map(|_| random::positive_rational(&mut rng)).collect();
        let v = Multiplier::new(q, u, h).unwrap();
        for n in 0..6 {
            for m in 0..6 {
                prop_assert!(tensor_power_norm_sq(&v, n + m) <= tensor_power_norm_sq(&v, n) * tensor_power_norm_sq(&v, m));
            }
        }
    }

    #[test]
    fn fock_matrices_multiply_like_series(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let q = Quiver::new(&random::finite_system(&mut rng, 3, 2));
        let space = FockSpace::new(&q, 4).unwrap();
        let t = random::element(&mut rng, &space);
        let u = random::element(&mut rng, &space);
        let product = matrix(&space, &series_product(&space, &t, &u).unwrap()).unwrap();
        prop_assert_eq!(product, matrix(&space, &t).unwrap().mul(&matrix(&space, &u).unwrap()));
        prop_assert_eq!(matrix(&space, &t).unwrap().coefficients(&space), t.trimmed());
    }

    #[test]
    fn mobius_maps_form_a_group(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let (f, g, h) = (random::mobius(&mut rng, 0.9), random::mobius(&mut rng, 0.9), random::mobius(&mut rng, 0.9));
        let z = Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
        let fg = f.compose(&g);
        prop_assert!(close(fg.apply(z).unwrap(), f.apply(g.apply(z).unwrap()).unwrap()));
        prop_assert!(close(fg.compose(&h).apply(z).unwrap(), f.compose(&g.compose(&h)).apply(z).unwrap()));
        prop_assert!(close(f.compose(&f.invert()).apply(z).unwrap(), z));
        prop_assert!(close(Mobius::identity().compose(&f).apply(z).unwrap(), f.apply(z).unwrap()));
        prop_assert!((f.apply(z).unwrap().norm()) <= 1.0 + 1e-12);
    }
}
