//! Random-walk estimators for a single coordinate `z*_u` of `Sz = b`.
//!
//! Each sample walks the implicit stochastic matrix
//! `P(v,v) = (|S_vv| − d_out(v)) / |S_vv|`, `P(v,w) = |S_vw| / |S_vv|`.
//! Stopping at `v` yields `sgn(S_vv)·b_v / (|S_vv| − d_out(v))`; every step
//! through `(v, w)` multiplies the result by `sgn(−S_vv·S_vw)`. The recursion
//! is run as a loop with that product kept in a sign accumulator.
//!
//! Estimates average `t = ⌈6‖b‖∞² / (δ²ε²)⌉` samples. Samples are drawn in
//! fixed-size batches, batch `j` from stream `(key, j)`, so an estimate is
//! reproducible for any thread count. Budgeted ledgers run the batches in
//! order on the calling thread and stop at the first refused query.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::{shifted_oracle, Oracle, QueryLedger, WalkStep};
use crate::rng::{stream, WalkRng};

/// Samples per reproducibility batch.
pub const BATCH: u64 = 4096;

/// Expected mode runs the unbounded walk; WorstCase truncates once the
/// survival probability drops to `1/(6t′)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Expected,
    WorstCase,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "expected" => Ok(Mode::Expected),
            "worstcase" | "worst-case" | "worst_case" => Ok(Mode::WorstCase),
            other => Err(Error::InvalidParameters(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkSample {
    pub value: f64,
    /// Walk steps taken before stopping.
    pub steps: u64,
    pub truncated: bool,
}

#[inline]
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn walk<O: Oracle, R: Rng + ?Sized>(
    oracle: &O,
    ledger: &mut QueryLedger,
    start: usize,
    floor: Option<f64>,
    rng: &mut R,
) -> Result<WalkSample> {
    let mut at = start;
    let mut sign = 1.0;
    let mut survive = 1.0;
    let mut steps = 0u64;
    loop {
        let info = oracle.vertex_query(ledger, at)?;
        let abs = info.s_uu.abs();
        let margin = abs - info.d_out;
        if margin > 0.0 && rng.random::<f64>() * abs < margin {
            let value = sign * sgn(info.s_uu) * info.b_u / margin;
            return Ok(WalkSample { value, steps, truncated: false });
        }
        if let Some(floor) = floor {
            survive *= info.d_out / abs;
            if survive <= floor {
                return Ok(WalkSample { value: 0.0, steps, truncated: true });
            }
        }
        match oracle.random_walk_query(ledger, at, rng)? {
            WalkStep::Move { to, weight } => {
                // each step multiplies by -S_uu·S_uv; a zero diagonal zeroes the sample
                let p = info.s_uu * weight;
                if p > 0.0 {
                    sign = -sign;
                } else if p == 0.0 {
                    sign = 0.0;
                }
                at = to;
                steps += 1;
            }
            WalkStep::Bottom => return Err(Error::NonTerminatingRisk(margin)),
        }
    }
}

/// One unbiased sample of `z*_u`. Requires a strictly dominant system; on a
/// vertex with no stopping mass and no neighbors it reports
/// `NonTerminatingRisk`.
pub fn recursive_sample<O: Oracle, R: Rng + ?Sized>(
    oracle: &O,
    ledger: &mut QueryLedger,
    u: usize,
    rng: &mut R,
) -> Result<WalkSample> {
    walk(oracle, ledger, u, None, rng)
}

/// As [`recursive_sample`], but gives up with value 0 once the probability of
/// having survived so far is at most `1/(6·t_prime)`.
pub fn truncated_sample<O: Oracle, R: Rng + ?Sized>(
    oracle: &O,
    ledger: &mut QueryLedger,
    u: usize,
    t_prime: f64,
    rng: &mut R,
) -> Result<WalkSample> {
    if !(t_prime > 0.0) {
        return Err(Error::InvalidParameters(format!("t_prime must be positive, got {t_prime}")));
    }
    walk(oracle, ledger, u, Some(truncation_threshold(t_prime)), rng)
}

pub fn truncation_threshold(t_prime: f64) -> f64 {
    1.0 / (6.0 * t_prime)
}

/// `⌈(S_max/δ)·ln(6t′)⌉`, the most steps a truncated walk can take.
pub fn depth_bound(smax: f64, delta: f64, t_prime: f64) -> u64 {
    ((smax / delta) * (6.0 * t_prime).ln()).max(0.0).ceil() as u64
}

/// Aggregate of a run of samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SampleStats {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: u64,
    pub truncated: u64,
    pub max_steps: u64,
    pub total_steps: u64,
    pub max_abs_untruncated: f64,
    pub queries: QueryLedger,
    /// A budget refused a query before all samples completed.
    pub exhausted: bool,
    // running mean; unlike sum/count it is exact when all samples agree
    avg: f64,
}

impl SampleStats {
    pub fn mean(&self) -> f64 {
        self.avg
    }

    fn push(&mut self, s: &WalkSample) {
        self.sum += s.value;
        self.sum_sq += s.value * s.value;
        self.count += 1;
        self.avg += (s.value - self.avg) / self.count as f64;
        self.max_steps = self.max_steps.max(s.steps);
        self.total_steps += s.steps;
        if s.truncated {
            self.truncated += 1;
        } else {
            self.max_abs_untruncated = self.max_abs_untruncated.max(s.value.abs());
        }
    }

    fn absorb(&mut self, o: &SampleStats) {
        if o.count > 0 {
            self.avg += (o.avg - self.avg) * (o.count as f64 / (self.count + o.count) as f64);
        }
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.count += o.count;
        self.truncated += o.truncated;
        self.max_steps = self.max_steps.max(o.max_steps);
        self.total_steps += o.total_steps;
        self.max_abs_untruncated = self.max_abs_untruncated.max(o.max_abs_untruncated);
        self.queries.merge(&o.queries);
        self.exhausted |= o.exhausted;
    }
}

/// Which sampler a run uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampler {
    Recursive,
    Truncated { t_prime: f64 },
}

fn run_batch<O: Oracle>(
    oracle: &O,
    ledger: &mut QueryLedger,
    u: usize,
    count: u64,
    sampler: Sampler,
    rng: &mut WalkRng,
) -> Result<SampleStats> {
    let floor = match sampler {
        Sampler::Recursive => None,
        Sampler::Truncated { t_prime } => Some(truncation_threshold(t_prime)),
    };
    // local copies let the loop keep the ledger and generator in registers
    let before = *ledger;
    let mut local = *ledger;
    let mut r = rng.clone();
    let mut stats = SampleStats::default();
    let mut outcome = Ok(());
    for _ in 0..count {
        match walk(oracle, &mut local, u, floor, &mut r) {
            Ok(s) => stats.push(&s),
            Err(Error::BudgetExhausted { .. }) => {
                stats.exhausted = true;
                break;
            }
            Err(e) => {
                outcome = Err(e);
                break;
            }
        }
    }
    *ledger = local;
    *rng = r;
    outcome?;
    stats.queries = ledger.since(&before);
    Ok(stats)
}

/// Draws `count` samples at `u`, batch `j` from stream `(key, j)`. Without a
/// budget the batches run on the rayon pool; with one they run in order and
/// stop when the budget is spent, keeping only completed samples.
pub fn run_samples<O: Oracle + Sync>(
    oracle: &O,
    ledger: &mut QueryLedger,
    u: usize,
    count: u64,
    sampler: Sampler,
    key: u64,
) -> Result<SampleStats> {
    if let Sampler::Truncated { t_prime } = sampler {
        if !(t_prime > 0.0) {
            return Err(Error::InvalidParameters(format!("t_prime must be positive, got {t_prime}")));
        }
    }
    let batches = count.div_ceil(BATCH);
    let size = |j: u64| BATCH.min(count - j * BATCH);
    let mut total = SampleStats::default();
    if ledger.budget().is_some() {
        let before = ledger.snapshot();
        for j in 0..batches {
            let mut rng = stream(key, j);
            let s = run_batch(oracle, ledger, u, size(j), sampler, &mut rng)?;
            total.absorb(&s);
            if s.exhausted {
                break;
            }
        }
        total.queries = ledger.since(&before);
        return Ok(total);
    }
    let parts: Vec<SampleStats> = (0..batches)
        .into_par_iter()
        .map(|j| {
            let mut sub = QueryLedger::new();
            let mut rng = stream(key, j);
            run_batch(oracle, &mut sub, u, size(j), sampler, &mut rng)
        })
        .collect::<Result<_>>()?;
    for p in &parts {
        total.absorb(p);
    }
    ledger.merge(&total.queries);
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateParams {
    pub delta: f64,
    pub eps: f64,
    pub bmax: f64,
    pub mode: Mode,
}

impl EstimateParams {
    pub fn new(delta: f64, eps: f64, bmax: f64, mode: Mode) -> Self {
        Self { delta, eps, bmax, mode }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !(self.delta > 0.0) || !(self.bmax >= 0.0) {
            return Err(Error::InvalidParameters(format!(
                "need eps > 0, delta > 0, bmax >= 0 (got eps={}, delta={}, bmax={})",
                self.eps, self.delta, self.bmax
            )));
        }
        Ok(())
    }

    /// `t = ⌈6·bmax²/(δ²ε²)⌉`, at least 1.
    pub fn sample_count(&self) -> Result<u64> {
        self.validate()?;
        let x = 6.0 * self.bmax * self.bmax / (self.delta * self.delta * self.eps * self.eps);
        // absorb last-ulp noise so that e.g. 599.9999999999999 and 600.0000000000001 both give 600
        let t = (x * (1.0 - 1e-12)).ceil();
        if !t.is_finite() || t > 1e18 {
            return Err(Error::InvalidParameters(format!("sample count {x:e} is not representable")));
        }
        Ok((t as u64).max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    pub estimate: f64,
    /// Completed samples behind the estimate (summed over runs when boosted).
    pub samples: u64,
    /// Samples the parameters asked for per run.
    pub requested: u64,
    pub runs: u32,
    pub truncation_threshold: Option<f64>,
    pub truncated: u64,
    pub max_steps: u64,
    pub queries: QueryLedger,
    pub params: EstimateParams,
    /// The σ applied to the diagonal, for the non-strict route.
    pub shift: Option<f64>,
    /// The budget ran out; `estimate` is the mean of completed samples
    /// (0 when there are none).
    pub partial: bool,
}

impl EstimateReport {
    fn exact_zero(params: EstimateParams) -> Self {
        Self {
            estimate: 0.0,
            samples: 0,
            requested: 0,
            runs: 0,
            truncation_threshold: None,
            truncated: 0,
            max_steps: 0,
            queries: QueryLedger::new(),
            params,
            shift: None,
            partial: false,
        }
    }
}

/// Mean of `t` samples at `u`. With probability at least 2/3 the result is
/// within `eps` of `z*_u` when the system is `delta`-dominant and
/// `bmax ≥ ‖b‖∞`.
pub fn estimate_entry<O: Oracle + Sync, R: Rng + ?Sized>(
    oracle: &O,
    ledger: &mut QueryLedger,
    u: usize,
    params: EstimateParams,
    rng: &mut R,
) -> Result<EstimateReport> {
    let t = params.sample_count()?;
    if u >= oracle.n() {
        return Err(Error::IndexOutOfRange { index: u, bound: oracle.n() });
    }
    let sampler = match params.mode {
        Mode::Expected => Sampler::Recursive,
        Mode::WorstCase => Sampler::Truncated { t_prime: t as f64 },
    };
    let key = rng.random::<u64>();
    let before = ledger.snapshot();
    let stats = run_samples(oracle, ledger, u, t, sampler, key)?;
    let used = ledger.since(&before);
    Ok(EstimateReport {
        estimate: stats.mean(),
        samples: stats.count,
        requested: t,
        runs: 1,
        truncation_threshold: match sampler {
            Sampler::Truncated { t_prime } => Some(truncation_threshold(t_prime)),
            Sampler::Recursive => None,
        },
        truncated: stats.truncated,
        max_steps: stats.max_steps,
        queries: used,
        params,
        shift: None,
        partial: stats.exhausted,
    })
}

/// `max(1, ⌈24·ln(1/fail_prob)⌉)` independent runs for the median trick.
pub fn boosting_runs(fail_prob: f64) -> Result<u32> {
    if !(fail_prob > 0.0 && fail_prob < 1.0) {
        return Err(Error::InvalidParameters(format!("fail_prob must lie in (0,1), got {fail_prob}")));
    }
    Ok(((24.0 * (1.0 / fail_prob).ln()).ceil() as u32).max(1))
}

/// Median (lower median for an even count) of independent estimates.
pub fn estimate_entry_boosted<O: Oracle + Sync, R: Rng + ?Sized>(
    oracle: &O,
    ledger: &mut QueryLedger,
    u: usize,
    params: EstimateParams,
    fail_prob: f64,
    rng: &mut R,
) -> Result<EstimateReport> {
    let m = boosting_runs(fail_prob)?;
    let start = ledger.snapshot();
    let mut values = Vec::with_capacity(m as usize);
    let mut agg: Option<EstimateReport> = None;
    for _ in 0..m {
        let r = estimate_entry(oracle, ledger, u, params, rng)?;
        if r.samples > 0 || !r.partial {
            values.push(r.estimate);
        }
        let a = agg.get_or_insert(EstimateReport { samples: 0, truncated: 0, runs: 0, ..r });
        a.samples += r.samples;
        a.truncated += r.truncated;
        a.max_steps = a.max_steps.max(r.max_steps);
        a.runs += 1;
        a.partial |= r.partial;
        if r.partial {
            break;
        }
    }
    let mut report = agg.expect("at least one run");
    values.sort_by(f64::total_cmp);
    report.estimate = if values.is_empty() { 0.0 } else { values[(values.len() - 1) / 2] };
    report.queries = ledger.since(&start);
    Ok(report)
}

/// Relative-error estimate: within `eps·‖z*‖∞` with probability at least
/// 2/3, using the inner additive error `eps·bmax/(2·smax)`. A zero
/// right-hand side answers 0 without touching the oracle.
pub fn estimate_entry_relative<O: Oracle + Sync, R: Rng + ?Sized>(
    oracle: &O,
    ledger: &mut QueryLedger,
    u: usize,
    params: EstimateParams,
    smax: f64,
    rng: &mut R,
) -> Result<EstimateReport> {
    if !(smax > 0.0) {
        return Err(Error::InvalidParameters(format!("smax must be positive, got {smax}")));
    }
    params.validate()?;
    if params.bmax == 0.0 {
        return Ok(EstimateReport::exact_zero(params));
    }
    let inner = EstimateParams { eps: relative_inner_eps(params.eps, params.bmax, smax), ..params };
    estimate_entry(oracle, ledger, u, inner, rng)
}

pub fn relative_inner_eps(eps: f64, bmax: f64, smax: f64) -> f64 {
    eps * bmax / (2.0 * smax)
}

/// `σ = S_max / ((2/ε + 1)·κ∞)`.
pub fn shift_sigma(smax: f64, eps: f64, kappa_inf: f64) -> f64 {
    smax / ((2.0 / eps + 1.0) * kappa_inf)
}

/// Estimate for a non-strictly dominant system (non-singular, or symmetric
/// with a same-sign diagonal and `b` in the range). Shifts the diagonal by
/// `σ` and runs the relative-error estimator with error `eps/10` on the
/// shifted system, in WorstCase mode.
pub fn estimate_entry_nonstrict<O: Oracle + Sync, R: Rng + ?Sized>(
    oracle: &O,
    ledger: &mut QueryLedger,
    u: usize,
    kappa_inf: f64,
    eps: f64,
    bmax: f64,
    smax: f64,
    rng: &mut R,
) -> Result<EstimateReport> {
    // κ∞ ≥ 1 always holds; computed values can land an ulp below it
    if !(kappa_inf >= 1.0 - 1e-9) || !(eps > 0.0) || !(bmax >= 0.0) || !(smax > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "need kappa >= 1, eps > 0, bmax >= 0, smax > 0 (got {kappa_inf}, {eps}, {bmax}, {smax})"
        )));
    }
    let sigma = shift_sigma(smax, eps, kappa_inf);
    let params = EstimateParams::new(sigma, eps / 10.0, bmax, Mode::WorstCase);
    if bmax == 0.0 {
        let mut r = EstimateReport::exact_zero(params);
        r.shift = Some(sigma);
        return Ok(r);
    }
    let shifted = shifted_oracle(oracle, sigma)?;
    let mut r = estimate_entry_relative(&shifted, ledger, u, params, smax + sigma, rng)?;
    r.shift = Some(sigma);
    Ok(r)
}

/// Friedkin–Johnsen opinion at `u` for an `I + L` system with opinions in
/// `[0, 1]`: `δ = 1`, `bmax = 1`, WorstCase mode.
pub fn estimate_fj_opinion<O: Oracle + Sync, R: Rng + ?Sized>(
    oracle: &O,
    ledger: &mut QueryLedger,
    u: usize,
    eps: f64,
    rng: &mut R,
) -> Result<EstimateReport> {
    estimate_entry(oracle, ledger, u, EstimateParams::new(1.0, eps, 1.0, Mode::WorstCase), rng)
}
