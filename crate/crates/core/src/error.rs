use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Integrand or kernel evaluated on its singular set.
    #[error("singularity: {0}")]
    Singularity(String),
    /// Caller-supplied objects violate a checked precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Argument outside the supported evaluation range.
    #[error("range error: {0}")]
    Range(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
