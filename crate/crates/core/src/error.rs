use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("partial trace must keep at least one factor; use the full trace instead")]
    ScalarReduction,

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("block decomposition failed: {0}")]
    Decomposition(String),

    #[error("center witness stayed degenerate after {0} attempts")]
    Degeneracy(usize),

    #[error("dimension {dim} exceeds the superoperator cap {cap}")]
    Resource { dim: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("invalid input: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
