//! Self-check suites comparing the walk estimators with the exact
//! references. `ddwalk verify` runs them; a deliberately broken oracle
//! ([`Mutant::SignFlip`]) must make them fail.

use rand::Rng;

use crate::error::Result;
use crate::graphgen::{random_regular, uniform_opinions, with_unit_weights};
use crate::hardgen::{default_min_gamma, sample_mu_n, verify_gap};
use crate::io::{format_system, parse_system};
use crate::oracle::{Oracle, QueryLedger, VertexInfo, WalkStep};
use crate::reference::{dense_solve, fj_fixed_point};
use crate::rng::{derive, stream, WalkRng};
use crate::solver::{recursive_sample, run_samples, truncated_sample, Sampler};
use crate::system::SparseDDSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutant {
    /// Reports every walk step with the opposite weight sign.
    SignFlip,
}

/// Wraps an oracle and corrupts its walk answers.
pub struct MutantOracle<O> {
    inner: O,
    mutant: Option<Mutant>,
}

impl<O: Oracle> MutantOracle<O> {
    pub fn new(inner: O, mutant: Option<Mutant>) -> Self {
        Self { inner, mutant }
    }
}

impl<O: Oracle> Oracle for MutantOracle<O> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn vertex_query(&self, ledger: &mut QueryLedger, u: usize) -> Result<VertexInfo> {
        self.inner.vertex_query(ledger, u)
    }

    fn neighbor_query(&self, ledger: &mut QueryLedger, u: usize, i: usize) -> Result<usize> {
        self.inner.neighbor_query(ledger, u, i)
    }

    fn random_walk_query<R: Rng + ?Sized>(&self, ledger: &mut QueryLedger, u: usize, rng: &mut R) -> Result<WalkStep> {
        match (self.inner.random_walk_query(ledger, u, rng)?, self.mutant) {
            (WalkStep::Move { to, weight }, Some(Mutant::SignFlip)) => Ok(WalkStep::Move { to, weight: -weight }),
            (step, _) => Ok(step),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Strictly dominant system with random signs everywhere: `n` vertices,
/// about `deg` off-diagonals per row, every row dominated by at least `delta`.
pub fn random_dd_system(n: usize, deg: usize, delta: f64, rng: &mut WalkRng) -> SparseDDSystem {
    let mut offdiag = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for i in 0..n {
        for _ in 0..deg {
            let j = rng.random_range(0..n);
            if j != i && seen.insert((i, j)) {
                let w = rng.random_range(0.1..1.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
                offdiag.push((i, j, w));
            }
        }
    }
    let mut dout = vec![0.0; n];
    for &(i, _, w) in &offdiag {
        dout[i] += f64::abs(w);
    }
    let diag: Vec<(usize, f64)> = (0..n)
        .map(|i| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            (i, sign * (dout[i] + delta + rng.random_range(0.0..0.5)))
        })
        .collect();
    let b = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    SparseDDSystem::from_triplets(n, &diag, &offdiag, b).expect("generated system is valid")
}

fn suite(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> SuiteResult {
    match f() {
        Ok((passed, detail)) => SuiteResult { name, passed, detail },
        Err(e) => SuiteResult { name, passed: false, detail: format!("error: {e}") },
    }
}

/// Runs every suite. Each takes at most a few seconds.
pub fn run_suites(seed: u64, mutant: Option<Mutant>) -> Vec<SuiteResult> {
    let key = |i: u64| derive(seed, i);
    vec![
        suite("triplet-round-trip", || {
            let mut rng = stream(key(0), 0);
            let s = random_dd_system(30, 4, 0.5, &mut rng);
            let back = parse_system(&format_system(&s))?;
            Ok((back == s, "export then import reproduces the system".into()))
        }),
        suite("walk-frequencies", || {
            let mut rng = stream(key(1), 0);
            let s = random_dd_system(10, 5, 0.5, &mut rng);
            let o = MutantOracle::new(s.oracle(), mutant);
            let mut ledger = QueryLedger::new();
            let draws = 100_000u64;
            let mut worst = 0.0f64;
            for u in 0..s.n() {
                let table = s.walk_probabilities(u);
                let mut hits = vec![0u64; s.n()];
                let mut signs_ok = true;
                for _ in 0..if table.is_empty() { 0 } else { draws } {
                    if let WalkStep::Move { to, weight } = o.random_walk_query(&mut ledger, u, &mut rng)? {
                        hits[to] += 1;
                        let stored = s.row(u).find(|&(v, _)| v == to).map(|(_, w)| w);
                        signs_ok &= stored == Some(weight);
                    }
                }
                if !signs_ok {
                    return Ok((false, format!("walk weights at vertex {u} differ from the stored entries")));
                }
                for (v, p) in table {
                    let sd = (p * (1.0 - p) / draws as f64).sqrt();
                    worst = worst.max((hits[v] as f64 / draws as f64 - p).abs() / sd);
                }
            }
            Ok((worst <= 5.0, format!("largest deviation {worst:.2} standard deviations")))
        }),
        suite("unbiasedness", || {
            let mut worst = 0.0f64;
            for i in 0..3 {
                let mut rng = stream(key(2), i);
                let s = random_dd_system(15, 3, 0.5, &mut rng);
                let z = dense_solve(&s, s.rhs())?.z;
                let o = MutantOracle::new(s.oracle(), mutant);
                let n_samples = 200_000u64;
                let bound = 4.0 * (s.b_inf() / s.max_delta()) / (n_samples as f64).sqrt();
                for u in [0, 7, 14] {
                    let st = run_samples(&o, &mut QueryLedger::new(), u, n_samples, Sampler::Recursive, rng.random())?;
                    worst = worst.max((st.mean() - z[u]).abs() / bound);
                }
            }
            Ok((worst <= 1.0, format!("largest error {worst:.3} of the allowed bound")))
        }),
        suite("negation-coupling", || {
            let mut rng = stream(key(3), 0);
            let s = random_dd_system(12, 3, 0.5, &mut rng);
            let neg = s.negated();
            let (a, b) = (MutantOracle::new(s.oracle(), mutant), MutantOracle::new(neg.oracle(), mutant));
            let mut same = true;
            for i in 0..2000u64 {
                let x = recursive_sample(&a, &mut QueryLedger::new(), (i % 12) as usize, &mut stream(key(3), i + 1))?;
                let y = recursive_sample(&b, &mut QueryLedger::new(), (i % 12) as usize, &mut stream(key(3), i + 1))?;
                same &= x == y;
            }
            Ok((same, "negating S and b leaves every coupled sample unchanged".into()))
        }),
        suite("truncation-rate", || {
            let s = SparseDDSystem::from_triplets(
                3,
                &[(0, 3.0), (1, 3.0), (2, 3.0)],
                &[(0, 1, -1.0), (1, 0, -1.0), (1, 2, -1.0), (2, 1, -1.0)],
                vec![1.0, 0.0, 0.0],
            )?;
            let o = MutantOracle::new(s.oracle(), mutant);
            let (t_prime, calls) = (600.0, 100_000u64);
            let mut rng = stream(key(4), 0);
            let mut truncated = 0u64;
            let mut ledger = QueryLedger::new();
            let mut sum = 0.0;
            for _ in 0..calls {
                let w = truncated_sample(&o, &mut ledger, 0, t_prime, &mut rng)?;
                truncated += w.truncated as u64;
                sum += w.value;
            }
            let p = 1.0 / (6.0 * t_prime);
            let limit = p + 4.0 * (p / calls as f64).sqrt();
            let rate = truncated as f64 / calls as f64;
            let mean_err = (sum / calls as f64 - 8.0 / 21.0).abs();
            let ok = rate <= limit && mean_err <= 4.0 / (calls as f64).sqrt() + p;
            Ok((ok, format!("truncation rate {rate:.2e} (limit {limit:.2e}), mean error {mean_err:.2e}")))
        }),
        suite("fj-fixed-point", || {
            let mut worst = 0.0f64;
            for i in 0..5 {
                let mut rng = stream(key(5), i);
                let edges = with_unit_weights(&random_regular(40, 4, &mut rng)?);
                let innate = uniform_opinions(40, &mut rng);
                let s = SparseDDSystem::fj_system(40, &edges, innate.clone())?;
                let a = fj_fixed_point(40, &edges, &innate, 1e-12, 100_000)?;
                let b = dense_solve(&s, s.rhs())?.z;
                worst = worst.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
            }
            Ok((worst <= 1e-8, format!("largest disagreement {worst:.2e}")))
        }),
        suite("hard-instance", || {
            let mut rng = stream(key(6), 0);
            let h = sample_mu_n(60, 12, 4, default_min_gamma(4), &mut rng)?;
            let gap = verify_gap(&h, 20, &mut rng)?;
            let ok = h.system0.is_delta_dd(1.0) && gap.max_abs_family0 == 0.0 && gap.min_family1 >= gap.c0;
            Ok((ok, format!("min z*_u under b¹ {:.3e} vs c0 {:.3e}", gap.min_family1, gap.c0)))
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_systems_are_strictly_dominant() {
        let mut rng = stream(9, 0);
        for _ in 0..10 {
            let s = random_dd_system(20, 4, 0.5, &mut rng);
            assert!(s.max_delta() >= 0.5);
        }
    }
}
