use thiserror::Error;

/// Failure classes shared by every module.
///
/// The split matters to callers: the command-line front end maps each class
/// to its own exit status.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An input is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An enumeration, sieve or scan would exceed its configured guard.
    #[error("resource guard exceeded: {0}")]
    Resource(String),
    /// A numeric procedure failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A result failed its own certificate check.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn resource(msg: impl Into<String>) -> Error {
    Error::Resource(msg.into())
}
