use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate entry ({0}, {1})")]
    DuplicateEntry(usize, usize),
    #[error("off-diagonal entry ({0}, {0}) lies on the diagonal")]
    SelfLoop(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("value {0} is not a finite real")]
    NonFinite(f64),
    #[error("zero off-diagonal weight at ({0}, {1})")]
    ZeroWeight(usize, usize),
    #[error("innate opinion {value} at vertex {vertex} outside [0, 1]")]
    OpinionOutOfRange { vertex: usize, value: f64 },
    #[error("edge ({0}, {1}) has non-positive weight {2}")]
    NegativeWeight(usize, usize, f64),

    #[error("query budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },
    #[error("shift sigma must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("walk may not terminate: delta hint {0} is not positive")]
    NonTerminatingRisk(f64),

    #[error("dimension {n} exceeds the dense limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is singular and not symmetric")]
    SingularNonSymmetric,
    #[error("fixed point iteration stalled after {iters} iterations (gap {gap:e})")]
    NonConvergence { iters: usize, gap: f64 },

    #[error("no expander with d={d} on k={k} vertices after {attempts} attempts")]
    ExpanderNotFound { k: usize, d: usize, attempts: usize },
    #[error("gap violation at vertex {vertex}: z = {value:e} < c0 = {c0:e}")]
    GapViolation { vertex: usize, value: f64, c0: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
