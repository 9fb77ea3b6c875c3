//! The `ddwalk` command line. Exit codes: 0 success, 1 verification
//! failure, 2 bad input (parse errors, invalid parameters), 3 the input
//! violates the model (not diagonally dominant, opinions outside [0, 1]).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{lb_csv, run_bench, run_lb, sweep_csv, BenchConfig};
use crate::error::{Error, Result};
use crate::graphgen::{erdos_renyi, random_regular, uniform_opinions, with_unit_weights};
use crate::hardgen::default_min_gamma;
use crate::io::{format_edges, format_opinions, parse_edges, parse_opinions, read_system, read_to_string};
use crate::oracle::QueryLedger;
use crate::reference::fj_fixed_point;
use crate::rng::stream;
use crate::solver::{estimate_entry, estimate_entry_nonstrict, EstimateParams, EstimateReport, Mode};
use crate::system::SparseDDSystem;
use crate::verify::{run_suites, Mutant};

#[derive(Parser, Debug)]
#[command(name = "ddwalk", version, about = "Random-walk estimates of single coordinates of diagonally dominant systems")]
pub struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random graph with uniform innate opinions.
    Gen(GenArgs),
    /// Estimate one coordinate of the solution of a system in triplet format.
    Solve(SolveArgs),
    /// Estimate one Friedkin–Johnsen equilibrium opinion.
    Fj(FjArgs),
    /// Error-versus-budget sweep on a Friedkin–Johnsen system.
    Bench(BenchArgs),
    /// Distinguishing experiment on the two-expander hard instances.
    Lb(LbArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum GraphKind {
    Regular,
    Er,
    FjRandom,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ModeArg {
    Expected,
    Worstcase,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Expected => Mode::Expected,
            ModeArg::Worstcase => Mode::WorstCase,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum MutantArg {
    SignFlip,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    pub kind: GraphKind,
    #[arg(long)]
    pub n: usize,
    /// Degree (regular).
    #[arg(long)]
    pub d: Option<usize>,
    /// Edge probability (er, fj-random).
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Writes `<out>.edges` and `<out>.opinions`.
    #[arg(long, default_value = "graph")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub matrix: PathBuf,
    /// Vertex to estimate (0-indexed).
    #[arg(long, default_value_t = 0)]
    pub u: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Dominance margin; scanned from the matrix when omitted.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Upper bound on κ∞(S); selects the non-strict estimator.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, value_enum, default_value = "expected")]
    pub mode: ModeArg,
    /// Right-hand side, one value per line (overrides the matrix file).
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// Cap on oracle queries.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct FjArgs {
    pub edges: PathBuf,
    pub opinions: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub u: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    pub edges: PathBuf,
    pub opinions: PathBuf,
    /// Vertices sampled with replacement per budget.
    #[arg(long, default_value_t = 1000)]
    pub vertices: usize,
    #[arg(long, value_delimiter = ',', default_value = "5000,10000,20000,40000,80000")]
    pub budget: Vec<u64>,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "expected")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Fill the wall_ms column (otherwise 0, keeping output reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct LbArgs {
    #[arg(long, default_value_t = 900)]
    pub n: usize,
    #[arg(long, default_value_t = 30)]
    pub k: usize,
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000,20000")]
    pub budget: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Spectral expansion each expander half must exceed.
    #[arg(long)]
    pub min_gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, hide = true)]
    pub mutant: Option<MutantArg>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::OpinionOutOfRange { .. } | Error::NegativeWeight(..) | Error::NonTerminatingRisk(_) => 3,
        _ => 2,
    }
}

/// Parses `args` and runs the command, writing to the given streams.
pub fn run<I, T>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match cli.threads {
        // the pool runs the command on one of its own workers, so output is
        // buffered there and copied out afterwards
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => {
                let (mut o, mut e) = (Vec::new(), Vec::new());
                let r = pool.install(|| dispatch(cli.command, &mut o, &mut e));
                let _ = out.write_all(&o);
                let _ = err.write_all(&e);
                r
            }
            Err(e) => Err(Error::InvalidParameters(e.to_string())),
        },
        None => dispatch(cli.command, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> Result<i32> {
    match cmd {
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Solve(a) => cmd_solve(&a, out, err),
        Command::Fj(a) => cmd_fj(&a, out),
        Command::Bench(a) => cmd_bench(&a, out, err),
        Command::Lb(a) => cmd_lb(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_gen(a: &GenArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let mut rng = stream(a.seed, 0);
    let need = |x: Option<f64>, name: &str| x.ok_or_else(|| Error::InvalidParameters(format!("--{name} is required")));
    let edges = match a.kind {
        GraphKind::Regular => {
            let d = a.d.ok_or_else(|| Error::InvalidParameters("--d is required".into()))?;
            random_regular(a.n, d, &mut rng)?
        }
        GraphKind::Er | GraphKind::FjRandom => erdos_renyi(a.n, need(a.p, "p")?, &mut rng)?,
    };
    let opinions = uniform_opinions(a.n, &mut rng);
    let (ep, op) = (with_suffix(&a.out, ".edges"), with_suffix(&a.out, ".opinions"));
    write_file(&ep, &format_edges(&with_unit_weights(&edges)))?;
    write_file(&op, &format_opinions(&opinions))?;
    writeln!(out, "wrote {} edges to {} and {} opinions to {}", edges.len(), ep.display(), a.n, op.display())?;
    Ok(0)
}

fn print_report(out: &mut dyn std::io::Write, r: &EstimateReport) -> Result<()> {
    writeln!(out, "estimate: {}", r.estimate)?;
    writeln!(out, "samples: {} of t = {}", r.samples, r.requested)?;
    if let Some(th) = r.truncation_threshold {
        writeln!(out, "truncation threshold: {th:e} ({} samples truncated)", r.truncated)?;
    }
    if let Some(sigma) = r.shift {
        writeln!(out, "diagonal shift sigma: {sigma}")?;
    }
    let q = &r.queries;
    writeln!(
        out,
        "queries: {} (vertex {}, neighbor {}, walk {})",
        q.total(),
        q.vertex_queries,
        q.neighbor_queries,
        q.walk_queries
    )?;
    writeln!(out, "params: delta = {}, eps = {}, bmax = {}", r.params.delta, r.params.eps, r.params.bmax)?;
    if r.partial {
        writeln!(out, "partial: budget exhausted, mean of completed samples")?;
    }
    Ok(())
}

fn ledger_for(budget: Option<u64>) -> QueryLedger {
    budget.map_or_else(QueryLedger::new, QueryLedger::with_budget)
}

fn check_vertex(u: usize, n: usize) -> Result<()> {
    if u >= n {
        return Err(Error::IndexOutOfRange { index: u, bound: n });
    }
    Ok(())
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> Result<i32> {
    let mut s = read_system(&a.matrix)?;
    if let Some(path) = &a.rhs {
        s = s.with_rhs(parse_opinions(&read_to_string(path)?)?)?;
    }
    check_vertex(a.u, s.n())?;
    let mut rng = stream(a.seed, 0);
    let mut ledger = ledger_for(a.budget);
    let bmax = s.b_inf();
    if let Some(kappa) = a.kappa {
        let report = estimate_entry_nonstrict(&s.oracle(), &mut ledger, a.u, kappa, a.eps, bmax, s.s_max(), &mut rng)?;
        print_report(out, &report)?;
        return Ok(0);
    }
    let delta = match a.delta {
        Some(d) => d,
        None => {
            let d = s.max_delta();
            writeln!(out, "delta = {d} (δ derived from full matrix scan)")?;
            d
        }
    };
    if !(delta > 0.0) {
        writeln!(err, "error: the system is not strictly diagonally dominant (delta = {delta}); pass --kappa to use the shifted estimator")?;
        return Ok(3);
    }
    let report = estimate_entry(&s.oracle(), &mut ledger, a.u, EstimateParams::new(delta, a.eps, bmax, a.mode.into()), &mut rng)?;
    print_report(out, &report)?;
    Ok(0)
}

fn load_fj(edges: &Path, opinions: &Path) -> Result<(Vec<(usize, usize, f64)>, Vec<f64>, SparseDDSystem)> {
    let e = parse_edges(&read_to_string(edges)?)?;
    let o = parse_opinions(&read_to_string(opinions)?)?;
    let s = SparseDDSystem::fj_system(o.len(), &e, o.clone())?;
    Ok((e, o, s))
}

fn cmd_fj(a: &FjArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let (_, _, s) = load_fj(&a.edges, &a.opinions)?;
    check_vertex(a.u, s.n())?;
    writeln!(out, "W = {}", s.weighted_max_degree())?;
    let mut ledger = ledger_for(a.budget);
    let report = crate::solver::estimate_fj_opinion(&s.oracle(), &mut ledger, a.u, a.eps, &mut stream(a.seed, 0))?;
    print_report(out, &report)?;
    Ok(0)
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> Result<i32> {
    let (edges, innate, s) = load_fj(&a.edges, &a.opinions)?;
    if s.n() > crate::reference::DENSE_LIMIT {
        return Err(Error::TooLarge { n: s.n(), limit: crate::reference::DENSE_LIMIT });
    }
    let truth = fj_fixed_point(s.n(), &edges, &innate, 1e-10, 1_000_000)?;
    let cfg = BenchConfig {
        vertices: a.vertices,
        budgets: a.budget.clone(),
        params: EstimateParams::new(1.0, a.eps, 1.0, a.mode.into()),
        seed: a.seed,
        timing: a.timing,
    };
    let result = run_bench(&s.oracle(), &truth, &cfg)?;
    let csv = sweep_csv(&result.rows);
    match &a.csv {
        Some(p) => write_file(p, &csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    for e in &result.effects {
        writeln!(
            err,
            "budget {}: {} of {} estimates discarded a budget-cut walk; {:.1} completed samples on average; {} estimates had none",
            e.budget, e.discarded_walks, a.vertices, e.mean_completed_samples, e.empty_estimates
        )?;
    }
    Ok(0)
}

fn cmd_lb(a: &LbArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let gamma = a.min_gamma.unwrap_or_else(|| default_min_gamma(a.d));
    let rows = run_lb(a.n, a.k, a.d, gamma, &a.budget, a.trials, a.seed)?;
    let csv = lb_csv(&rows);
    match &a.csv {
        Some(p) => write_file(p, &csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let mutant = a.mutant.map(|MutantArg::SignFlip| Mutant::SignFlip);
    let results = run_suites(a.seed, mutant);
    let mut all = true;
    for r in &results {
        writeln!(out, "{:<20} {}  {}", r.name, if r.passed { "pass" } else { "FAIL" }, r.detail)?;
        all &= r.passed;
    }
    writeln!(out, "{}", if all { "all suites passed" } else { "verification failed" })?;
    Ok(if all { 0 } else { 1 })
}
