use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input geometry violates an invariant of its type.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The operation is not defined for this body variant.
    #[error("unsupported body variant: {0}")]
    UnsupportedVariant(&'static str),

    /// A precondition on a point or direction does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Two numerically computed quantities that must be ordered are not.
    #[error("numerical inconsistency: {0}")]
    Inconsistent(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn geometry(msg: impl Into<String>) -> Error {
    Error::InvalidGeometry(msg.into())
}
