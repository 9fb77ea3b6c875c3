//! Error-versus-budget sweeps, the lower-bound sweep and shared statistics.
//!
//! Every sampled vertex `i` of a sweep draws its walks from stream
//! `(seed, i)` at every budget, so a larger budget extends the same walks
//! instead of drawing new ones. That keeps the rungs of a ladder comparable
//! and makes the output independent of the thread count.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{Error, Result};
use crate::hardgen::distinguish_experiment;
use crate::oracle::{Oracle, QueryLedger};
use crate::rng::{derive, stream};
use crate::solver::{estimate_entry, EstimateParams};

pub const SWEEP_HEADER: &str = "budget,abs_err_mean,abs_err_p90,trials,mean_queries,wall_ms";
pub const LB_HEADER: &str = "budget,acc_family0,acc_family1,mean_queries";

/// `P(X ≥ k)` for `X ~ Binomial(n, p)`.
pub fn binomial_upper_tail(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    Binomial::new(p, n).expect("valid binomial").sf(k - 1)
}

/// One-sided test of `H0: rate ≤ p0`; passes when `H0` is rejected at
/// level `alpha`.
pub fn rate_exceeds(successes: u64, trials: u64, p0: f64, alpha: f64) -> bool {
    binomial_upper_tail(successes, trials, p0) <= alpha
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

/// Nearest-rank percentile, `q` in `(0, 1]`.
pub fn percentile(x: &[f64], q: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let rank = ((q * s.len() as f64).ceil() as usize).clamp(1, s.len());
    s[rank - 1]
}

/// Least-squares fit `y = a + b·x`; returns `(a, b, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (my - slope * mx, slope, r2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub budget: u64,
    pub abs_err_mean: f64,
    pub abs_err_p90: f64,
    pub trials: usize,
    pub mean_queries: f64,
    pub wall_ms: f64,
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.budget, self.abs_err_mean, self.abs_err_p90, self.trials, self.mean_queries, self.wall_ms
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{}", r.csv_line()).unwrap();
    }
    out
}

/// How each rung dealt with walks cut short by its budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetEffect {
    pub budget: u64,
    /// Estimates whose last walk was refused a query and discarded.
    pub discarded_walks: usize,
    pub mean_completed_samples: f64,
    /// Estimates that finished with no completed sample (reported as 0).
    pub empty_estimates: usize,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub vertices: usize,
    pub budgets: Vec<u64>,
    pub params: EstimateParams,
    pub seed: u64,
    /// Record wall-clock time per rung; off by default because it breaks
    /// byte-identical output.
    pub timing: bool,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub rows: Vec<SweepRow>,
    pub effects: Vec<BudgetEffect>,
    pub vertices: Vec<usize>,
}

/// For each budget, estimates `z*_u` at `vertices` vertices sampled with
/// replacement (the same vertices for every budget) and summarises the
/// absolute error against `truth`.
pub fn run_bench<O: Oracle + Sync>(oracle: &O, truth: &[f64], cfg: &BenchConfig) -> Result<BenchOutcome> {
    if cfg.vertices == 0 {
        return Err(Error::InvalidParameters("at least one vertex must be sampled".into()));
    }
    if cfg.budgets.is_empty() || cfg.budgets.contains(&0) {
        return Err(Error::InvalidParameters("budgets must be a non-empty list of positive integers".into()));
    }
    if truth.len() != oracle.n() {
        return Err(Error::DimensionMismatch { expected: oracle.n(), got: truth.len() });
    }
    let n = oracle.n();
    let mut pick = stream(cfg.seed, u64::MAX);
    let vertices: Vec<usize> = (0..cfg.vertices).map(|_| pick.random_range(0..n)).collect();
    let walk_key = derive(cfg.seed, 0);

    let mut rows = Vec::with_capacity(cfg.budgets.len());
    let mut effects = Vec::with_capacity(cfg.budgets.len());
    for &budget in &cfg.budgets {
        let start = Instant::now();
        let per_vertex: Vec<(f64, u64, bool, u64)> = vertices
            .par_iter()
            .enumerate()
            .map(|(i, &u)| {
                let mut ledger = QueryLedger::with_budget(budget);
                let mut rng = stream(walk_key, i as u64);
                let r = estimate_entry(oracle, &mut ledger, u, cfg.params, &mut rng)?;
                Ok(((r.estimate - truth[u]).abs(), ledger.total(), r.partial, r.samples))
            })
            .collect::<Result<_>>()?;
        let wall_ms = if cfg.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        let errs: Vec<f64> = per_vertex.iter().map(|p| p.0).collect();
        let queries: Vec<f64> = per_vertex.iter().map(|p| p.1 as f64).collect();
        rows.push(SweepRow {
            budget,
            abs_err_mean: mean(&errs),
            abs_err_p90: percentile(&errs, 0.9),
            trials: cfg.vertices,
            mean_queries: mean(&queries),
            wall_ms,
        });
        effects.push(BudgetEffect {
            budget,
            discarded_walks: per_vertex.iter().filter(|p| p.2).count(),
            mean_completed_samples: mean(&per_vertex.iter().map(|p| p.3 as f64).collect::<Vec<_>>()),
            empty_estimates: per_vertex.iter().filter(|p| p.3 == 0).count(),
        });
    }
    Ok(BenchOutcome { rows, effects, vertices })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbRow {
    pub budget: u64,
    pub acc_family0: f64,
    pub acc_family1: f64,
    pub mean_queries: f64,
}

pub fn lb_csv(rows: &[LbRow]) -> String {
    let mut out = String::from(LB_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{},{},{},{}", r.budget, r.acc_family0, r.acc_family1, r.mean_queries).unwrap();
    }
    out
}

/// The distinguishing experiment at each budget. Every rung sees the same
/// instances and start vertices.
pub fn run_lb(
    n: usize,
    k: usize,
    d: usize,
    min_gamma: f64,
    budgets: &[u64],
    trials: usize,
    seed: u64,
) -> Result<Vec<LbRow>> {
    budgets
        .iter()
        .map(|&budget| {
            let o = distinguish_experiment(n, k, d, min_gamma, budget, trials, &mut stream(seed, 0))?;
            Ok(LbRow { budget, acc_family0: o.success_rate_0, acc_family1: o.success_rate_1, mean_queries: o.mean_queries })
        })
        .collect()
}
