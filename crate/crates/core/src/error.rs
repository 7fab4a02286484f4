use thiserror::Error;

/// Errors produced by the relational-kernel library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid task: {0}")]
    InvalidTask(String),

    #[error("invalid kernel parameters: {0}")]
    InvalidKernel(String),

    #[error("unsupported task: {0}")]
    UnsupportedTask(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// The hyperbolic parameterization collapses (lambda = 0). The dual oracle
    /// is exact there and should be used instead.
    #[error("degenerate closed form: {0}")]
    Degenerate(String),

    #[error("numerical failure (condition estimate {condition:e}): {message}")]
    Numerical { message: String, condition: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Validation-style failures: bad arguments rather than bad numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidTask(_)
                | Error::InvalidKernel(_)
                | Error::UnsupportedTask(_)
                | Error::Domain(_)
                | Error::Parse(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
