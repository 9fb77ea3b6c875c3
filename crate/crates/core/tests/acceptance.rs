//! Acceptance run: one line per criterion. A wrong result makes the run
//! exit non-zero; a correct result that only overran its wall-clock limit
//! is reported as FAIL but does not, since timing depends on the host.
//! `ACCEPTANCE_ONLY=3,7` restricts the run to the listed criteria.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use ddwalk::bench::{linear_fit, rate_exceeds};
use ddwalk::graphgen::{random_regular, uniform_opinions, with_unit_weights};
use ddwalk::hardgen::{c0, default_min_gamma, distinguish_experiment, sample_mu_n, verify_gap};
use ddwalk::oracle::{shift_diagonal, QueryLedger};
use ddwalk::reference::{dense_solve, dense_solve_matrix, fj_fixed_point, in_range, kappa_inf, pseudo_solve_symmetric};
use ddwalk::rng::{stream, WalkRng};
use ddwalk::solver::{
    estimate_entry, estimate_entry_nonstrict, estimate_fj_opinion, run_samples, shift_sigma, EstimateParams, Mode,
    Sampler,
};
use ddwalk::verify::random_dd_system;
use ddwalk::SparseDDSystem;

type Outcome = (bool, String);

fn tridiagonal() -> SparseDDSystem {
    SparseDDSystem::from_triplets(
        3,
        &[(0, 3.0), (1, 3.0), (2, 3.0)],
        &[(0, 1, -1.0), (1, 0, -1.0), (1, 2, -1.0), (2, 1, -1.0)],
        vec![1.0, 0.0, 0.0],
    )
    .unwrap()
}

const TRIDIAGONAL_Z0: f64 = 8.0 / 21.0;

fn unbiasedness() -> Outcome {
    let mut systems = Vec::new();
    let mut rng = stream(101, 0);
    for _ in 0..10 {
        let n = rng.random_range(5..=50);
        systems.push(random_dd_system(n, 4, 0.5, &mut rng));
    }
    systems.push(tridiagonal());
    systems.push(SparseDDSystem::from_triplets(1, &[(0, 3.0)], &[], vec![6.0]).unwrap());
    // mixed signs: negative diagonal, positive and negative couplings
    systems.push(
        SparseDDSystem::from_triplets(
            3,
            &[(0, -2.0), (1, 4.0), (2, -1.5)],
            &[(0, 1, 1.0), (0, 2, -0.5), (1, 0, -1.5), (1, 2, 2.0), (2, 1, 0.75)],
            vec![0.5, -1.0, 1.0],
        )
        .unwrap(),
    );
    let n_samples = 1_000_000u64;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (i, s) in systems.iter().enumerate() {
        let delta = s.max_delta();
        assert!(delta >= 0.5, "system {i} has delta {delta}");
        let z = dense_solve(s, s.rhs()).unwrap().z;
        let tol = 4.0 * (s.b_inf() / delta) / 1e3;
        let mut coords = vec![0, s.n() / 2, s.n() - 1];
        coords.dedup();
        for u in coords {
            let st = run_samples(&s.oracle(), &mut QueryLedger::new(), u, n_samples, Sampler::Recursive, rng.random())
                .unwrap();
            worst = worst.max((st.mean() - z[u]).abs() / tol);
            assert!(st.max_abs_untruncated <= s.b_inf() / delta * (1.0 + 1e-12));
            checked += 1;
        }
    }
    (worst <= 1.0, format!("{checked} coordinates on 13 systems, worst error {worst:.3} of tolerance"))
}

fn success_probability() -> Outcome {
    let s = tridiagonal();
    let p = EstimateParams::new(1.0, 0.05, 1.0, Mode::WorstCase);
    let mut rng = stream(102, 0);
    let hits = (0..300)
        .filter(|_| {
            let r = estimate_entry(&s.oracle(), &mut QueryLedger::new(), 0, p, &mut rng).unwrap();
            (r.estimate - TRIDIAGONAL_Z0).abs() <= 0.05
        })
        .count() as u64;
    (rate_exceeds(hits, 300, 2.0 / 3.0, 0.01), format!("{hits}/300 within eps = 0.05"))
}

fn query_scaling() -> Outcome {
    let mut rng = stream(103, 0);
    let (mut smax, mut q) = (Vec::new(), Vec::new());
    let mut detail = String::new();
    for d in [4, 8, 16, 32] {
        let n = 200;
        let edges = with_unit_weights(&random_regular(n, d, &mut rng).unwrap());
        let s = SparseDDSystem::fj_system(n, &edges, uniform_opinions(n, &mut rng)).unwrap();
        let mut ledger = QueryLedger::new();
        let samples = 100_000u64;
        run_samples(&s.oracle(), &mut ledger, 0, samples, Sampler::Recursive, rng.random()).unwrap();
        let per = ledger.total() as f64 / samples as f64;
        assert!(per <= 2.0 * (1.0 + s.s_max()));
        smax.push(s.s_max());
        q.push(per);
        detail.push_str(&format!("d={d}: {per:.2} "));
    }
    let (_, slope, r2) = linear_fit(&smax, &q);
    (
        (0.8..=2.2).contains(&slope) && r2 >= 0.98,
        format!("{detail}| slope {slope:.3} (delta = 1), R² {r2:.5}"),
    )
}

fn truncation_bound() -> Outcome {
    let s = tridiagonal();
    let t_prime = 600.0;
    let calls = 100_000u64;
    let mut ledger = QueryLedger::new();
    let st = run_samples(&s.oracle(), &mut ledger, 0, calls, Sampler::Truncated { t_prime }, 104).unwrap();
    let p = 1.0 / (6.0 * t_prime);
    let limit = p + 4.0 * (p * (1.0 - p) / calls as f64).sqrt();
    let rate = st.truncated as f64 / calls as f64;
    let depth = ddwalk::solver::depth_bound(s.s_max(), 1.0, t_prime) + 1;
    (
        rate <= limit && st.max_steps <= depth,
        format!("truncation rate {rate:.2e} (limit {limit:.2e}); deepest walk {} of {depth} steps", st.max_steps),
    )
}

fn random_laplacian(rng: &mut WalkRng) -> SparseDDSystem {
    let n = rng.random_range(4..=30);
    let mut edges = std::collections::BTreeMap::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.insert((u, v), rng.random_range(0.5..2.0));
    }
    for _ in 0..n {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            edges.insert((u.min(v), u.max(v)), rng.random_range(0.5..2.0));
        }
    }
    laplacian(n, &edges.into_iter().map(|((u, v), w)| (u, v, w)).collect::<Vec<_>>())
}

fn laplacian(n: usize, edges: &[(usize, usize, f64)]) -> SparseDDSystem {
    let mut diag = vec![0.0; n];
    let mut off = Vec::new();
    for &(u, v, w) in edges {
        diag[u] += w;
        diag[v] += w;
        off.push((u, v, -w));
        off.push((v, u, -w));
    }
    let diag: Vec<_> = diag.into_iter().enumerate().collect();
    SparseDDSystem::from_triplets(n, &diag, &off, vec![0.0; n]).unwrap()
}

fn inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn nonstrict_reduction() -> Outcome {
    let eps = 0.2;
    let mut rng = stream(105, 0);
    let mut worst_gap = 0.0f64;
    let mut worst_norm = 0.0f64;
    for _ in 0..20 {
        let l = random_laplacian(&mut rng);
        let n = l.n();
        let mut b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = b.iter().sum::<f64>() / n as f64;
        b.iter_mut().for_each(|x| *x -= m);
        assert!(in_range(&l, &b).unwrap());
        let z = pseudo_solve_symmetric(&l, &b).unwrap().z;
        let sigma = shift_sigma(l.s_max(), eps, kappa_inf(&l).unwrap());
        let mut a = l.to_dense();
        for (u, row) in a.iter_mut().enumerate() {
            row[u] = shift_diagonal(row[u], sigma);
        }
        let zt = dense_solve_matrix(&a, &b).unwrap().z;
        let gap = zt.iter().zip(&z).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst_gap = worst_gap.max(gap / (eps / 2.0 * inf(&z)));
        worst_norm = worst_norm.max(inf(&zt) / ((1.0 + eps / 2.0) * inf(&z)));
    }
    let part_a = worst_gap <= 1.0 && worst_norm <= 1.0;

    // the estimator's cost grows like κ∞², so it runs on single-edge
    // Laplacians (κ∞ = 1) with random weights and right-hand sides
    let trials = 150u64;
    let mut hits = 0u64;
    for _ in 0..trials {
        let w = rng.random_range(0.5..2.0);
        let c = rng.random_range(0.5..1.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let l = laplacian(2, &[(0, 1, w)]).with_rhs(vec![c, -c]).unwrap();
        let z = pseudo_solve_symmetric(&l, l.rhs()).unwrap().z;
        let kappa = kappa_inf(&l).unwrap();
        let u = rng.random_range(0..2);
        let r = estimate_entry_nonstrict(&l.oracle(), &mut QueryLedger::new(), u, kappa, eps, l.b_inf(), l.s_max(), &mut rng)
            .unwrap();
        hits += ((r.estimate - z[u]).abs() <= eps * inf(&z)) as u64;
    }
    let part_b = rate_exceeds(hits, trials, 2.0 / 3.0, 0.01);
    (
        part_a && part_b,
        format!(
            "(a) worst drift {worst_gap:.3} and worst norm ratio {worst_norm:.3} of allowed on 20 Laplacians; (b) {hits}/{trials} within eps·‖z*‖∞"
        ),
    )
}

fn fj_correctness() -> Outcome {
    let s = SparseDDSystem::fj_system(2, &[(0, 1, 1.0)], vec![1.0, 0.0]).unwrap();
    let z = dense_solve(&s, s.rhs()).unwrap().z;
    let mut rng = stream(106, 0);
    let hits = (0..300)
        .filter(|_| {
            let r = estimate_fj_opinion(&s.oracle(), &mut QueryLedger::new(), 0, 0.02, &mut rng).unwrap();
            (r.estimate - z[0]).abs() <= 0.02
        })
        .count() as u64;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(10..=200);
        let edges: Vec<_> = ddwalk::graphgen::erdos_renyi(n, 0.05, &mut rng)
            .unwrap()
            .into_iter()
            .map(|(u, v)| (u, v, rng.random_range(0.1..3.0)))
            .collect();
        let innate = uniform_opinions(n, &mut rng);
        let s = SparseDDSystem::fj_system(n, &edges, innate.clone()).unwrap();
        let a = fj_fixed_point(n, &edges, &innate, 1e-13, 1_000_000).unwrap();
        let b = dense_solve(&s, s.rhs()).unwrap().z;
        worst = worst.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }
    (
        rate_exceeds(hits, 300, 2.0 / 3.0, 0.01) && worst <= 1e-8,
        format!("{hits}/300 within 0.02 of z*_0 = {:.6}; fixed point vs dense worst {worst:.1e}", z[0]),
    )
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_ddwalk")).args(args).output().expect("run ddwalk");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn table1_trend() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("g4");
    let p = prefix.to_str().unwrap();
    assert_eq!(run_cli(&["gen", "regular", "--n", "2000", "--d", "4", "--seed", "7", "--out", p]).0, 0);
    let (e, o) = (format!("{p}.edges"), format!("{p}.opinions"));
    let (code, csv) =
        run_cli(&["bench", &e, &o, "--vertices", "2000", "--budget", "5000,10000,20000,40000,80000", "--seed", "1"]);
    assert_eq!(code, 0);
    let csv = String::from_utf8(csv).unwrap();
    let errs: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[1] / w[0]).collect();
    let decreasing = ratios.iter().all(|&r| r < 1.0);
    let in_band = ratios.iter().filter(|r| (0.6..=0.85).contains(*r)).count();
    (
        decreasing && in_band >= 3,
        format!(
            "abs_err_mean {} ; ratios {}",
            errs.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>().join(" → "),
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn lower_bound_instances() -> Outcome {
    let (n, k, d) = (900, 30, 8);
    let gate = default_min_gamma(d);
    let mut rng = stream(108, 0);
    let mut min_z1 = f64::INFINITY;
    let mut ok = true;
    for _ in 0..3 {
        let h = sample_mu_n(n, k, d, gate, &mut rng).unwrap();
        ok &= h.system0.is_delta_dd(1.0) && h.system1.is_delta_dd(1.0);
        let planted = 1.0 + ((d + 1) * k) as f64;
        ok &= h.system0.diag(h.w_gprime) == planted && h.system0.diag(h.w_b) == planted && h.system0.s_max() == planted;
        match verify_gap(&h, 50, &mut rng) {
            Ok(g) => {
                ok &= g.max_abs_family0 == 0.0;
                min_z1 = min_z1.min(g.min_family1);
            }
            Err(_) => ok = false,
        }
    }
    let ample = distinguish_experiment(n, k, d, gate, 20_000, 100, &mut rng).unwrap();
    let tiny = distinguish_experiment(n, k, d, gate, 10, 100, &mut rng).unwrap();
    ok &= ample.success_rate_0 >= 2.0 / 3.0 && ample.success_rate_1 >= 2.0 / 3.0;
    ok &= ample.max_queries <= 20_000 && tiny.max_queries <= 10;
    let chance = 0.35..=0.65;
    ok &= chance.contains(&tiny.success_rate_0) && chance.contains(&tiny.success_rate_1);
    (
        ok,
        format!(
            "min z*_u under b¹ {min_z1:.3} ≥ c0 {:.2e}; budget 20000 accuracy {:.2}/{:.2}; budget 10 accuracy {:.2}/{:.2}",
            c0(d),
            ample.success_rate_0,
            ample.success_rate_1,
            tiny.success_rate_0,
            tiny.success_rate_1
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("g");
    let p = prefix.to_str().unwrap();
    assert_eq!(run_cli(&["gen", "fj-random", "--n", "300", "--p", "0.02", "--seed", "3", "--out", p]).0, 0);
    let (e, o) = (format!("{p}.edges"), format!("{p}.opinions"));
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let csv = dir.path().join(format!("t{threads}.csv"));
        let c = csv.to_str().unwrap();
        let args = ["bench", &e, &o, "--vertices", "300", "--budget", "1000,4000", "--seed", "9", "--threads", threads, "--csv", c];
        assert_eq!(run_cli(&args).0, 0);
        outputs.push(std::fs::read(&csv).unwrap());
    }
    (outputs[0] == outputs[1], format!("{} bytes of CSV with 1 and 4 threads", outputs[0].len()))
}

fn main() {
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    // (name, check, wall-clock limit in seconds)
    let criteria: [(&str, fn() -> Outcome, Option<f64>); 9] = [
        ("unbiasedness", unbiasedness, Some(60.0)),
        ("success probability", success_probability, Some(120.0)),
        ("query-complexity scaling", query_scaling, Some(60.0)),
        ("truncation bound", truncation_bound, Some(30.0)),
        ("non-strict reduction", nonstrict_reduction, Some(180.0)),
        ("FJ correctness", fj_correctness, Some(60.0)),
        ("budget-ladder error trend", table1_trend, Some(300.0)),
        ("lower-bound instances", lower_bound_instances, Some(300.0)),
        ("determinism", determinism, None),
    ];
    let (mut failed, mut overran) = (0, 0);
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let in_time = limit.is_none_or(|l| secs <= l);
        failed += (!ok) as usize;
        overran += (ok && !in_time) as usize;
        let ok = ok && in_time;
        let limit_note = match limit {
            Some(l) if !in_time => format!("; over the {l:.0} s limit"),
            _ => String::new(),
        };
        println!("criterion {id} [{name}]: {} ({secs:.1} s) {detail}{limit_note}", if ok { "PASS" } else { "FAIL" });
    }
    if overran > 0 {
        println!("{overran} criteria gave correct results but exceeded their time limit");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
