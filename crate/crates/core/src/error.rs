use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A drift-strength threshold rules out any solution. The `condition`
    /// field carries a machine-readable tag such as `"bR>=k"` or
    /// `"divergent-integral"`.
    #[error("nonexistence threshold reached ({condition}): {detail}")]
    NonexistenceThreshold { condition: String, detail: String },

    /// A structural hypothesis on a coefficient failed a sampled check.
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    /// An iterative procedure could not produce a usable answer.
    #[error("diagnostic failure: {0}")]
    Diagnostic(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
