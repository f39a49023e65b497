//! Error type shared by every module of the crate.

use alloc::string::String;

/// Failures reported by the library.
///
/// `InvalidInput` and `InvalidParameter` describe bad caller data;
/// `LimitExceeded` marks requests beyond a documented size cap;
/// `InvariantViolation` means an internal check that should always hold did
/// not, and carries a description of the offending values.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input data (strings, populations, files).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A numeric parameter outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A size cap was exceeded.
    #[error("{what} = {got} exceeds the limit {limit}")]
    LimitExceeded {
        /// Name of the capped quantity.
        what: &'static str,
        /// The cap.
        limit: u64,
        /// The requested value.
        got: u64,
    },
    /// An identity or structural invariant failed to hold.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid_input(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn invalid_param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn violation(msg: impl Into<String>) -> Error {
    Error::InvariantViolation(msg.into())
}
