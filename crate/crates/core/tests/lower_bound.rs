use rand::seq::SliceRandom;
use rand::Rng;

use ddwalk::bench::run_lb;
use ddwalk::hardgen::{
    assemble_instance, c0, default_min_gamma, distinguish_experiment, random_regular_expander, sample_mu_n, verify_gap,
};
use ddwalk::reference::dense_solve;
use ddwalk::rng::stream;

#[test]
fn instances_have_the_planted_shape() {
    let (k, d) = (30, 8);
    let mut rng = stream(1, 0);
    for _ in 0..3 {
        let h = sample_mu_n(900, k, d, default_min_gamma(d), &mut rng).unwrap();
        assert!(h.system0.is_delta_dd(1.0) && h.system1.is_delta_dd(1.0));
        assert_eq!(h.edges().len(), 2 * (k * d / 2) + 1);
        let smax = 1.0 + ((d + 1) * k) as f64;
        assert_eq!(h.system0.diag(h.w_gprime), smax);
        assert_eq!(h.system0.diag(h.w_b), smax);
        assert_eq!(h.system0.s_max(), smax);
        assert_eq!(h.system1.rhs().iter().filter(|&&x| x == 1.0).count(), k);
    }
}

#[test]
fn relabeling_commutes_with_solving() {
    let (n, k, d) = (80, 12, 4);
    for seed in 0..3 {
        let mut rng = stream(seed, 0);
        let (g, _) = random_regular_expander(k, d, 0.0, &mut rng, 10).unwrap();
        let (b, _) = random_regular_expander(k, d, 0.0, &mut rng, 10).unwrap();
        let bridge = (rng.random_range(0..k), rng.random_range(0..k));
        let plain = assemble_instance(n, k, d, &g, &b, bridge, (0..n).collect(), 0.0, &mut rng).unwrap();
        let mut labels: Vec<usize> = (0..n).collect();
        labels.shuffle(&mut rng);
        let moved = assemble_instance(n, k, d, &g, &b, bridge, labels.clone(), 0.0, &mut rng).unwrap();
        let z = dense_solve(&plain.system1, plain.system1.rhs()).unwrap().z;
        let zl = dense_solve(&moved.system1, moved.system1.rhs()).unwrap().z;
        for u in 0..n {
            assert!((z[u] - zl[labels[u]]).abs() < 1e-12, "seed {seed}, vertex {u}");
        }
    }
}

#[test]
fn gap_holds_across_degrees() {
    let mut rng = stream(2, 0);
    for d in [4, 6, 8] {
        let h = sample_mu_n(200, 30, d, default_min_gamma(d), &mut rng).unwrap();
        let gap = verify_gap(&h, 30, &mut rng).unwrap();
        assert_eq!(gap.max_abs_family0, 0.0);
        assert!(gap.min_family1 >= c0(d), "d={d}: {} < {}", gap.min_family1, c0(d));
    }
    assert!(c0(4) > c0(8) && c0(8) > c0(16) && c0(16) > 0.0);
}

#[test]
fn dense_expanders_clear_two_thirds() {
    // the 2/3 expansion target is out of reach for sparse halves but easy once
    // the halves are dense
    let mut rng = stream(3, 0);
    let (_, gamma) = random_regular_expander(30, 20, 2.0 / 3.0, &mut rng, 100).unwrap();
    assert!(gamma > 2.0 / 3.0);
}

#[test]
fn budgets_are_never_exceeded() {
    for budget in [1, 10, 333] {
        let o = distinguish_experiment(900, 30, 8, default_min_gamma(8), budget, 40, &mut stream(4, budget)).unwrap();
        assert!(o.max_queries <= budget);
    }
}

#[test]
fn accuracy_grows_with_budget() {
    // below a couple of walks' worth of queries the few completed walks are
    // the short ones, which bias the estimate toward 0; the ladder starts above that
    let budgets = [640, 1280, 2560, 5120, 10240, 20480];
    let rows = run_lb(900, 30, 8, default_min_gamma(8), &budgets, 100, 5).unwrap();
    let acc: Vec<f64> = rows.iter().map(|r| r.acc_family1).collect();
    let mut inversions = 0;
    for w in acc.windows(2) {
        if w[1] < w[0] {
            inversions += 1;
            let p = (w[0] + w[1]) / 2.0;
            let noise = 2.0 * (2.0 * p * (1.0 - p) / 100.0).sqrt();
            assert!(w[0] - w[1] <= noise, "drop {:.2} → {:.2} exceeds noise", w[0], w[1]);
        }
    }
    assert!(inversions <= 1, "{acc:?}");
    assert!(acc[acc.len() - 1] >= 2.0 / 3.0);
}
