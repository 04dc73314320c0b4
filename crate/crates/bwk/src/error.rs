use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received arguments that violate its
    /// documented preconditions.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Arm index out of range for the instance.
    #[error("arm index {arm} out of range (instance has {arms} arms)")]
    BadArm { arm: usize, arms: usize },

    /// The benchmark LP has unbounded value. Only possible when no time
    /// resource is present and some arm has positive reward with zero
    /// consumption everywhere.
    #[error("benchmark LP is unbounded: {0}")]
    Unbounded(String),

    /// An operation that rescales mass onto the null arm was called on an
    /// instance that does not declare one.
    #[error("instance declares no null arm ({0})")]
    MissingNullArm(String),

    /// An operation that needs the time resource was called on an instance
    /// that does not declare one.
    #[error("instance declares no time resource ({0})")]
    MissingTimeResource(String),

    /// Experiment or environment configuration could not be interpreted.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for precondition failures.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
