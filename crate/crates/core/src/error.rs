use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A work or size cap would be exceeded.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A measure spec violates one of its structural conditions.
    #[error("spec invalid at `{path}` ({condition}): {detail}")]
    SpecInvalid {
        path: String,
        condition: String,
        detail: String,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An experiment precondition does not hold. Not a failure of the computation.
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn spec_invalid(
    path: impl Into<String>,
    condition: impl Into<String>,
    detail: impl Into<String>,
) -> Error {
    Error::SpecInvalid {
        path: path.into(),
        condition: condition.into(),
        detail: detail.into(),
    }
}
