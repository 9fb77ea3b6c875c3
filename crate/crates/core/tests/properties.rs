use proptest::prelude::*;
use rand::Rng;

use ddwalk::graphgen::{erdos_renyi, uniform_opinions, with_unit_weights};
use ddwalk::io::{format_system, parse_system};
use ddwalk::oracle::{shifted_oracle, Oracle, QueryLedger, WalkStep};
use ddwalk::reference::{dense_solve, fj_fixed_point, pseudo_solve_symmetric};
use ddwalk::rng::stream;
use ddwalk::solver::{recursive_sample, truncated_sample, depth_bound};
use ddwalk::system::DOUT_RTOL;
use ddwalk::verify::random_dd_system;
use ddwalk::SparseDDSystem;

fn system(seed: u64, n: usize, deg: usize, delta: f64) -> SparseDDSystem {
    random_dd_system(n, deg, delta, &mut stream(seed, 0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn export_import_round_trip(seed in any::<u64>(), n in 1usize..25, deg in 0usize..6) {
        let s = system(seed, n, deg, 0.5);
        let back = parse_system(&format_system(&s)).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(SparseDDSystem::from_parts(&s.to_triplets()).unwrap(), s);
    }

    #[test]
    fn sampling_tables_are_consistent(seed in any::<u64>(), n in 1usize..25, deg in 0usize..6) {
        let s = system(seed, n, deg, 0.5);
        prop_assert!(s.validate().is_ok());
        for u in 0..n {
            let cum = s.row_cumw(u);
            prop_assert!(cum.windows(2).all(|w| w[0] < w[1]));
            let abs_sum: f64 = s.row_weights(u).iter().map(|w| w.abs()).sum();
            prop_assert!((s.dout(u) - abs_sum).abs() <= DOUT_RTOL * abs_sum.max(1.0));
            if let Some(&last) = cum.last() {
                prop_assert_eq!(last, s.dout(u));
                let total: f64 = s.walk_probabilities(u).iter().map(|p| p.1).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
            prop_assert!(s.row_cols(u).iter().all(|&v| v != u));
        }
        prop_assert!(s.is_delta_dd(0.5));
    }

    #[test]
    fn ledger_counts_every_call(seed in any::<u64>(), calls in proptest::collection::vec(0u8..3, 0..200)) {
        let s = system(seed, 8, 3, 0.5);
        let o = s.oracle();
        let mut ledger = QueryLedger::new();
        let mut rng = stream(seed, 1);
        let mut previous = 0;
        for (i, kind) in calls.iter().enumerate() {
            let u = i % 8;
            match kind {
                0 => { o.vertex_query(&mut ledger, u).unwrap(); }
                1 => { let _ = o.neighbor_query(&mut ledger, u, 1); }
                _ => { o.random_walk_query(&mut ledger, u, &mut rng).unwrap(); }
            }
            prop_assert!(ledger.total() > previous);
            previous = ledger.total();
        }
        prop_assert_eq!(ledger.total(), calls.len() as u64);
        prop_assert_eq!(ledger.vertex_queries, calls.iter().filter(|&&k| k == 0).count() as u64);
    }

    #[test]
    fn shift_touches_only_the_diagonal(seed in any::<u64>(), sigma in 0.01f64..5.0) {
        let s = system(seed, 10, 3, 0.2);
        let plain = s.oracle();
        let shifted = shifted_oracle(&plain, sigma).unwrap();
        let (mut la, mut lb) = (QueryLedger::new(), QueryLedger::new());
        for u in 0..10 {
            let a = plain.vertex_query(&mut la, u).unwrap();
            let b = shifted.vertex_query(&mut lb, u).unwrap();
            prop_assert_eq!(b.s_uu.abs(), a.s_uu.abs() + sigma);
            prop_assert_eq!((a.d_out, a.b_u, a.delta_out), (b.d_out, b.b_u, b.delta_out));
            for i in 1..=a.delta_out {
                prop_assert_eq!(plain.neighbor_query(&mut la, u, i).unwrap(), shifted.neighbor_query(&mut lb, u, i).unwrap());
            }
            let (mut ra, mut rb) = (stream(seed, u as u64), stream(seed, u as u64));
            for _ in 0..20 {
                prop_assert_eq!(
                    plain.random_walk_query(&mut la, u, &mut ra).unwrap(),
                    shifted.random_walk_query(&mut lb, u, &mut rb).unwrap()
                );
            }
        }
        prop_assert_eq!(la, lb);
    }

    #[test]
    fn negation_leaves_coupled_samples_unchanged(seed in any::<u64>(), n in 2usize..15) {
        let s = system(seed, n, 3, 0.5);
        let neg = s.negated();
        for i in 0..50u64 {
            let u = (i as usize) % n;
            let a = recursive_sample(&s.oracle(), &mut QueryLedger::new(), u, &mut stream(seed, i)).unwrap();
            let b = recursive_sample(&neg.oracle(), &mut QueryLedger::new(), u, &mut stream(seed, i)).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn samples_are_bounded(seed in any::<u64>(), n in 1usize..15, delta in 0.2f64..2.0) {
        let s = system(seed, n, 4, delta);
        let bound = s.b_inf() / s.max_delta();
        let t_prime = 50.0;
        let depth = depth_bound(s.s_max(), s.max_delta(), t_prime);
        let mut rng = stream(seed, 2);
        for i in 0..200 {
            let r = recursive_sample(&s.oracle(), &mut QueryLedger::new(), i % n, &mut rng).unwrap();
            prop_assert!(r.value.abs() <= bound * (1.0 + 1e-12));
            let t = truncated_sample(&s.oracle(), &mut QueryLedger::new(), i % n, t_prime, &mut rng).unwrap();
            prop_assert!(t.steps <= depth);
            prop_assert!(t.truncated || t.value.abs() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn strictly_dominant_systems_are_nonsingular(seed in any::<u64>(), n in 1usize..30) {
        let s = system(seed, n, 4, 0.1);
        let r = dense_solve(&s, s.rhs()).unwrap();
        prop_assert!(!r.singular_flag);
        prop_assert!(r.residual_inf <= 1e-9 * s.b_inf().max(1.0));
    }

    #[test]
    fn walk_bottom_iff_empty_row(seed in any::<u64>(), n in 1usize..12) {
        let s = system(seed, n, 1, 0.5);
        let mut rng = stream(seed, 3);
        for u in 0..n {
            let step = s.oracle().random_walk_query(&mut QueryLedger::new(), u, &mut rng).unwrap();
            prop_assert_eq!(step == WalkStep::Bottom, s.degree(u) == 0);
        }
    }

    #[test]
    fn fj_systems_are_one_dominant(seed in any::<u64>(), n in 2usize..40, p in 0.05f64..0.5) {
        let mut rng = stream(seed, 0);
        let edges = with_unit_weights(&erdos_renyi(n, p, &mut rng).unwrap());
        let innate = uniform_opinions(n, &mut rng);
        let s = SparseDDSystem::fj_system(n, &edges, innate.clone()).unwrap();
        prop_assert!(s.is_delta_dd(1.0));
        let z = fj_fixed_point(n, &edges, &innate, 1e-12, 100_000).unwrap();
        prop_assert!(z.iter().all(|x| (0.0..=1.0).contains(x)));
    }
}

/// Symmetric positive definite (shifted Laplacian) systems: the LU and
/// eigen-decomposition references agree.
#[test]
fn dense_and_pseudo_solvers_agree_on_nonsingular_systems() {
    let mut rng = stream(41, 0);
    for _ in 0..20 {
        let n = rng.random_range(2..25);
        let edges = with_unit_weights(&erdos_renyi(n, 0.3, &mut rng).unwrap());
        let s = SparseDDSystem::fj_system(n, &edges, uniform_opinions(n, &mut rng)).unwrap();
        let a = dense_solve(&s, s.rhs()).unwrap().z;
        let b = pseudo_solve_symmetric(&s, s.rhs()).unwrap().z;
        let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-8, "gap {gap}");
    }
}
