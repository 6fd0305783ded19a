use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    /// The request exceeds what this build supports (sphere dimension, degree cap).
    #[error("unsupported: {0}")]
    Capability(String),

    /// The ensemble carries no usable mass for the requested quantity.
    #[error("degenerate ensemble: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
