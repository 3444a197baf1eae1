use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("integer overflow evaluating {0}")]
    Overflow(&'static str),

    #[error("{what} of size {size} exceeds budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        size: usize,
        budget: usize,
    },

    #[error("eigensolver failed to converge after {0} iterations")]
    NoConvergence(usize),

    #[error("malformed spectrum: {0}")]
    MalformedSpectrum(String),

    #[error("unstable step: {0}")]
    Unstable(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
