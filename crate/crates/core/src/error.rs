use thiserror::Error;

/// Errors raised by generators, estimators, decoders and the experiment harness.
#[derive(Debug, Error)]
pub enum AlcError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A computation was refused because its size exceeds a fixed budget.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// The operation has no meaningful answer for these inputs.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = AlcError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> AlcError {
    AlcError::InvalidArgument(msg.into())
}
