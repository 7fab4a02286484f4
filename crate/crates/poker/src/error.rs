use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PokerError {
    #[error("invalid card: {0}")]
    InvalidCard(String),
    #[error("invalid hand class: {0}")]
    InvalidClass(String),
    #[error("duplicate card {0}")]
    DuplicateCard(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("malformed equity matrix: {0}")]
    Format(String),
    #[error("hierarchy sampling failed after {attempts} attempts: {reason}")]
    SamplingFailed { attempts: usize, reason: String },
    #[error(transparent)]
    Task(#[from] relkern::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for PokerError {
    fn from(e: std::io::Error) -> Self {
        PokerError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for PokerError {
    fn from(e: serde_json::Error) -> Self {
        PokerError::Format(e.to_string())
    }
}

pub type Result<T, E = PokerError> = std::result::Result<T, E>;
