use thiserror::Error;

#[derive(Debug, Error)]
pub enum MuskatError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("grid mismatch between fields ({left} vs {right})")]
    GridMismatch { left: String, right: String },

    #[error("shift offset {offset:?} outside [-{n}, {n}]")]
    OffsetOutOfRange { offset: Vec<i64>, n: usize },

    #[error("lattice offset must be nonzero")]
    ZeroOffset,

    #[error("non-finite fourier symbol {value} at wavevector {wavevector:?}")]
    NonFiniteSymbol { wavevector: Vec<f64>, value: f64 },

    #[error("non-finite integrand at grid point {point} for offset {offset:?}")]
    NonFiniteIntegrand { point: usize, offset: Vec<i64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step {dt} violates the explicit stability bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("solution became non-finite at t = {t} (step {step}); max |f| before the step was {last_linf}")]
    Blowup { t: f64, step: u64, last_linf: f64 },

    #[error("run aborted: {0}")]
    RunAborted(String),

    #[error("smoothness target sigma = {requested} unreachable; best achievable {best} at K = {k}")]
    SigmaUnreachable { requested: f64, best: f64, k: usize },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("worker pool: {0}")]
    Pool(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MuskatError>;
