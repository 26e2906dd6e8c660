use thiserror::Error;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A register size or combined register exceeds what the simulator will allocate.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Mismatched lengths, qubit counts, or invalid/colliding qubit indices.
    #[error("shape error: {0}")]
    Shape(String),

    /// Parameters or values outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A budget plan that cannot be realized or does not cover the series.
    #[error("plan error: {0}")]
    Plan(String),

    #[error("i/o error: {0}")]
    Io(String),

    /// Malformed input data (CSV rows and the like).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
