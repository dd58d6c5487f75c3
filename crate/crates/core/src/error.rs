use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected n_max = {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("series oracle did not converge: last retained term {last_term:e} for K = {terms}")]
    NonConvergence { terms: usize, last_term: f64 },

    #[error("norm drift {drift:e} at t = {t} exceeds {limit:e}; reduce dt")]
    NormDrift { drift: f64, t: f64, limit: f64 },

    #[error("truncation leak: tail occupancy {tail:e} exceeds {limit:e}; raise n_max")]
    TruncationLeak { tail: f64, limit: f64 },

    #[error("empty series")]
    EmptySeries,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in the CLI's JSON error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonConvergence { .. } => "non_convergence",
            Error::NormDrift { .. } => "norm_drift",
            Error::TruncationLeak { .. } => "truncation_leak",
            Error::EmptySeries => "empty_series",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
