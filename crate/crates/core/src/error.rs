use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input (wrong dimensions, bad site indices, ...).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Input is well formed but violates a mathematical precondition
    /// (non-Hermitian matrix, non-extremal observable, not a density matrix).
    #[error("domain error: {0}")]
    Domain(String),
    /// A proven identity or bound failed numerically. This indicates a bug,
    /// never a property of the physical state.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
