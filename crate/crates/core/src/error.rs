use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("curvature symmetry violated: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    SymmetryViolation { residual: f64, tol: f64 },

    #[error("metric is singular or not positive definite at the queried point")]
    SingularMetric,

    #[error("finite-difference step underflow (step {0:.3e})")]
    StepUnderflow(f64),

    #[error("parameter out of validity range: {0}")]
    OutOfRange(String),

    #[error("soliton scale N = {n} is below the positivity threshold {threshold}")]
    NTooSmall { n: f64, threshold: f64 },

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("rank bound k = {k} outside 1..={max} for dimension {dim}")]
    BadRankBound { k: usize, max: usize, dim: usize },

    #[error("boundary search failed: {0}")]
    BoundarySearch(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
