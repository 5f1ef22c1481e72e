use thiserror::Error;

/// Errors raised by rule construction, merit evaluation and bound checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: empty subsets, bad formulas, out-of-range coordinates.
    #[error("usage error: {0}")]
    Usage(String),
    /// A mathematical quantity is undefined for the given parameters.
    #[error("domain error: {0}")]
    Domain(String),
    /// The parameters are valid but this code path does not handle them.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// An operation precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// An enumeration would exceed the configured resource cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// Two polynomials over different prime fields were combined.
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub(crate) fn resource(msg: impl Into<String>) -> Error {
    Error::Resource(msg.into())
}
