use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error(
        "initial state under-resolved: only {points} grid points within ±2ε (need at least 8)"
    )]
    UnderResolved { points: usize },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("singular tridiagonal system: zero pivot at row {row}")]
    Singular { row: usize },

    #[error("numerical instability at step {step}: norm changed by {drift:.3e} in one step")]
    Instability { step: usize, drift: f64 },

    #[error("dense oracle refuses grids larger than {max} points (got {got})")]
    OracleTooLarge { max: usize, got: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
