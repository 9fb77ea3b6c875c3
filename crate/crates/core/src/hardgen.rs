//! The two-expander hard distribution and the experiments run on it.
//!
//! An instance on `n` vertices consists of two `k`-vertex `d`-regular
//! expanders `G′` and `B`, `n − 2k` isolated vertices, and a single bridge
//! between a random `w_G′ ∈ G′` and a random `w_B ∈ B`. Every edge carries
//! weight `k` and `S = I + L`. The two right-hand sides are `b⁰ = 0` and
//! `b¹ = 1_B`. Vertices are relabelled by a uniform permutation and every
//! row lists its neighbors in an independent uniform order, so that the
//! oracle answers reveal nothing beyond what the walks explore.
//!
//! For `u ∈ G′` the solution is exactly 0 under `b⁰` and at least `c0(d)`
//! under `b¹`; telling the two apart at `u` therefore needs an estimate
//! with error below `c0(d)/2`.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphgen::random_regular;
use crate::io::format_system;
use crate::oracle::QueryLedger;
use crate::reference::{dense_solve_matrix, symmetric_eigen};
use crate::rng::stream;
use crate::solver::estimate_fj_opinion;
use crate::system::SparseDDSystem;

/// `(1 − e^{−1/(20d)}) / (12(d+2))`.
pub fn c0(d: usize) -> f64 {
    let d = d as f64;
    -(-1.0 / (20.0 * d)).exp_m1() / (12.0 * (d + 2.0))
}

/// `min(λ₂, 2 − λ_max)` of the normalized Laplacian `I − D^{-1/2} A D^{-1/2}`.
/// A disconnected graph has `λ₂ = 0`.
pub fn spectral_expansion(k: usize, edges: &[(usize, usize)]) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParameters("spectral expansion needs at least 2 vertices".into()));
    }
    let mut deg = vec![0.0f64; k];
    for &(u, v) in edges {
        deg[u] += 1.0;
        deg[v] += 1.0;
    }
    let mut m = vec![vec![0.0; k]; k];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = if deg[i] > 0.0 { 1.0 } else { 0.0 };
    }
    for &(u, v) in edges {
        let x = 1.0 / (deg[u] * deg[v]).sqrt();
        m[u][v] -= x;
        m[v][u] -= x;
    }
    let mut ev = symmetric_eigen(&m)?.values;
    ev.sort_by(f64::total_cmp);
    Ok(ev[1].min(2.0 - ev[k - 1]))
}

/// `1 − 2√(d−1)/d`, the expansion of a Ramanujan `d`-regular graph.
pub fn ramanujan_expansion(d: usize) -> f64 {
    let d = d as f64;
    1.0 - 2.0 * (d - 1.0).sqrt() / d
}

/// Expansion gate used when none is given: the Ramanujan level, capped at
/// 2/3. Random `d`-regular graphs sit near the Ramanujan level, so 2/3 can
/// only be demanded once `d` is large enough for that level to exceed it.
pub fn default_min_gamma(d: usize) -> f64 {
    ramanujan_expansion(d).min(2.0 / 3.0)
}

/// A random simple `d`-regular graph on `k` vertices whose spectral
/// expansion exceeds `min_gamma` (which also makes it connected).
pub fn random_regular_expander<R: Rng + ?Sized>(
    k: usize,
    d: usize,
    min_gamma: f64,
    rng: &mut R,
    max_attempts: usize,
) -> Result<(Vec<(usize, usize)>, f64)> {
    if d < 3 || k <= d || (k * d) % 2 != 0 {
        return Err(Error::InvalidParameters(format!("expander needs d ≥ 3, k > d and k·d even (k={k}, d={d})")));
    }
    for _ in 0..max_attempts {
        let edges = random_regular(k, d, rng)?;
        let gamma = spectral_expansion(k, &edges)?;
        if gamma > min_gamma {
            return Ok((edges, gamma));
        }
    }
    Err(Error::ExpanderNotFound { k, d, attempts: max_attempts })
}

#[derive(Debug, Clone)]
pub struct HardInstance {
    /// `(I + L, 0)`.
    pub system0: SparseDDSystem,
    /// `(I + L, 1_B)`.
    pub system1: SparseDDSystem,
    /// `labels[j]` is the public id of internal vertex `j`; internally
    /// `G′ = 0..k`, `B = k..2k`, and the rest are isolated.
    pub labels: Vec<usize>,
    pub w_gprime: usize,
    pub w_b: usize,
    pub k: usize,
    pub d: usize,
    /// Smaller of the two halves' spectral expansions.
    pub gamma: f64,
}

impl HardInstance {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Public ids of `G′`.
    pub fn gprime(&self) -> &[usize] {
        &self.labels[..self.k]
    }

    /// Public ids of `B`.
    pub fn b_side(&self) -> &[usize] {
        &self.labels[self.k..2 * self.k]
    }

    pub fn system(&self, family: u8) -> &SparseDDSystem {
        if family == 0 {
            &self.system0
        } else {
            &self.system1
        }
    }

    /// Undirected edges of the instance graph in public ids.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let s = &self.system0;
        (0..s.n()).flat_map(|u| s.row_cols(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v))).collect()
    }

    /// Triplet file with the `# hardgen ...` metadata line on top.
    pub fn export(&self, family: u8) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# hardgen k={} d={} wG={} wB={} gamma={} family={}",
            self.k, self.d, self.w_gprime, self.w_b, self.gamma, family
        )
        .unwrap();
        out.push_str(&format_system(self.system(family)));
        out
    }
}

/// Assembles an instance from the two expanders (internal ids `0..k` each),
/// the bridge endpoints (internal ids within each half), the labelling and
/// a source of randomness for the neighbor orderings.
pub fn assemble_instance<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    d: usize,
    g_edges: &[(usize, usize)],
    b_edges: &[(usize, usize)],
    bridge: (usize, usize),
    labels: Vec<usize>,
    gamma: f64,
    rng: &mut R,
) -> Result<HardInstance> {
    if n < 2 * k || labels.len() != n {
        return Err(Error::InvalidParameters(format!("need n ≥ 2k and n labels (n={n}, k={k})")));
    }
    let w = k as f64;
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut link = |u: usize, v: usize| {
        rows[labels[u]].push(labels[v]);
        rows[labels[v]].push(labels[u]);
    };
    for &(u, v) in g_edges {
        link(u, v);
    }
    for &(u, v) in b_edges {
        link(k + u, k + v);
    }
    link(bridge.0, k + bridge.1);
    let mut offdiag = Vec::with_capacity(2 * (k * d + 1));
    let mut diag = Vec::with_capacity(n);
    for (u, row) in rows.iter_mut().enumerate() {
        row.shuffle(rng);
        diag.push((u, 1.0 + w * row.len() as f64));
        offdiag.extend(row.iter().map(|&v| (u, v, -w)));
    }
    let system0 = SparseDDSystem::from_triplets(n, &diag, &offdiag, vec![0.0; n])?;
    let mut b1 = vec![0.0; n];
    for &j in &labels[k..2 * k] {
        b1[j] = 1.0;
    }
    let system1 = system0.with_rhs(b1)?;
    Ok(HardInstance {
        system0,
        system1,
        w_gprime: labels[bridge.0],
        w_b: labels[k + bridge.1],
        labels,
        k,
        d,
        gamma,
    })
}

/// Draws an instance from the hard distribution. `min_gamma` gates each
/// expander half (see [`default_min_gamma`]).
pub fn sample_mu_n<R: Rng + ?Sized>(n: usize, k: usize, d: usize, min_gamma: f64, rng: &mut R) -> Result<HardInstance> {
    if n < 2 * k {
        return Err(Error::InvalidParameters(format!("need n ≥ 2k (n={n}, k={k})")));
    }
    let (g, gamma_g) = random_regular_expander(k, d, min_gamma, rng, 1000)?;
    let (b, gamma_b) = random_regular_expander(k, d, min_gamma, rng, 1000)?;
    let bridge = (rng.random_range(0..k), rng.random_range(0..k));
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    assemble_instance(n, k, d, &g, &b, bridge, labels, gamma_g.min(gamma_b), rng)
}

/// Exact solutions on the `2k`-vertex connected component, indexed by
/// public id (isolated vertices read `z_u = b_u = 0`).
pub fn component_solution(h: &HardInstance, family: u8) -> Result<Vec<f64>> {
    let comp = &h.labels[..2 * h.k];
    let mut local = vec![usize::MAX; h.n()];
    for (i, &g) in comp.iter().enumerate() {
        local[g] = i;
    }
    let s = h.system(family);
    let mut a = vec![vec![0.0; comp.len()]; comp.len()];
    for (i, &g) in comp.iter().enumerate() {
        a[i][i] = s.diag(g);
        for (v, w) in s.row(g) {
            a[i][local[v]] = w;
        }
    }
    let rhs: Vec<f64> = comp.iter().map(|&g| s.b(g)).collect();
    let r = dense_solve_matrix(&a, &rhs)?;
    let mut z = vec![0.0; h.n()];
    for (i, &g) in comp.iter().enumerate() {
        z[g] = r.z[i];
    }
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub trials: usize,
    pub c0: f64,
    /// Largest `|z*_u|` under `b⁰` over the sampled `u`.
    pub max_abs_family0: f64,
    /// Smallest `z*_u` under `b¹` over the sampled `u`.
    pub min_family1: f64,
}

/// Checks the solution gap at `trials` uniformly random `u ∈ G′`.
pub fn verify_gap<R: Rng + ?Sized>(h: &HardInstance, trials: usize, rng: &mut R) -> Result<GapReport> {
    let z0 = component_solution(h, 0)?;
    let z1 = component_solution(h, 1)?;
    let c = c0(h.d);
    let mut report = GapReport { trials, c0: c, max_abs_family0: 0.0, min_family1: f64::INFINITY };
    for _ in 0..trials {
        let u = h.gprime()[rng.random_range(0..h.k)];
        report.max_abs_family0 = report.max_abs_family0.max(z0[u].abs());
        report.min_family1 = report.min_family1.min(z1[u]);
        if z1[u] < c {
            return Err(Error::GapViolation { vertex: u, value: z1[u], c0: c });
        }
    }
    Ok(report)
}

/// Yes ("the right-hand side is zero near `u`") iff the estimate is below
/// `c0/2`. An estimate built from no completed sample carries no
/// information and is replaced by a fair coin.
pub fn classify<R: Rng + ?Sized>(estimate: f64, samples: u64, c0: f64, rng: &mut R) -> bool {
    if samples == 0 {
        rng.random::<bool>()
    } else {
        estimate < c0 / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinguishOutcome {
    pub trials: usize,
    /// Fraction of trials where family 0 was answered Yes.
    pub success_rate_0: f64,
    /// Fraction of trials where family 1 was answered No.
    pub success_rate_1: f64,
    /// Mean oracle queries per estimate.
    pub mean_queries: f64,
    pub max_queries: u64,
}

/// Runs the distinguishing experiment: every trial draws a fresh instance
/// and a random `u ∈ G′`, estimates `z*_u` with error `c0(d)/4` through an
/// oracle capped at `budget` queries for both right-hand sides, and
/// classifies each. Trial `i` uses stream `(key, i)` with `key` drawn from
/// `rng`, so the result does not depend on the thread count.
pub fn distinguish_experiment<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    d: usize,
    min_gamma: f64,
    budget: u64,
    trials: usize,
    rng: &mut R,
) -> Result<DistinguishOutcome> {
    if budget == 0 || trials == 0 {
        return Err(Error::InvalidParameters("budget and trials must be positive".into()));
    }
    let key = rng.random::<u64>();
    let c = c0(d);
    let eps = c / 4.0;
    let outcomes: Vec<(bool, bool, u64, u64)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = stream(key, i);
            let h = sample_mu_n(n, k, d, min_gamma, &mut r)?;
            let u = h.gprime()[r.random_range(0..k)];
            let mut run = |family: u8| -> Result<(bool, u64)> {
                let mut ledger = QueryLedger::with_budget(budget);
                let rep = estimate_fj_opinion(&h.system(family).oracle(), &mut ledger, u, eps, &mut r)?;
                let yes = classify(rep.estimate, rep.samples, c, &mut r);
                Ok((yes, ledger.total()))
            };
            let (yes0, q0) = run(0)?;
            let (yes1, q1) = run(1)?;
            Ok((yes0, !yes1, q0, q1))
        })
        .collect::<Result<_>>()?;
    let t = trials as f64;
    Ok(DistinguishOutcome {
        trials,
        success_rate_0: outcomes.iter().filter(|o| o.0).count() as f64 / t,
        success_rate_1: outcomes.iter().filter(|o| o.1).count() as f64 / t,
        mean_queries: outcomes.iter().map(|o| (o.2 + o.3) as f64).sum::<f64>() / (2.0 * t),
        max_queries: outcomes.iter().map(|o| o.2.max(o.3)).max().unwrap_or(0),
    })
}
