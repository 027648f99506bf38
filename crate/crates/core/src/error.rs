use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("binomial coefficient C({n}, {k}) overflows usize")]
    Overflow { n: usize, k: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Iteration produced a non-finite state. `last_valid` is the index of the
    /// last finite sample.
    #[error("diverged at step {step} (last valid index {last_valid})")]
    Diverged { step: usize, last_valid: usize },

    #[error("matrix exponential did not converge: residual {residual:e} after {terms} terms")]
    NotConverged { residual: f64, terms: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_) | Error::Diverged { .. } | Error::NotConverged { .. }
        )
    }
}
