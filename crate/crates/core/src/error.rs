use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed input data (bad geometry, non-positive weight, ...).
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A point or edge outside the object it was queried against.
    #[error("domain error: {0}")]
    Domain(String),
    /// An operation was called on data that violates its precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// Bad argument value (e.g. an index set that is too small).
    #[error("argument error: {0}")]
    Argument(String),
    /// The operation is not available for this kind of space.
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource cap of {cap} exceeded after {partial} items")]
    Resource { cap: usize, partial: usize },
    #[error("malformed certificate: {0}")]
    Certificate(String),
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
