//! Error types shared across the library.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A non-finite cost or gradient was encountered during iteration.
    #[error("numerical divergence at iteration {iteration}: {message}")]
    Divergence { iteration: usize, message: String },

    /// The requested problem size or mode is not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Failure reading or writing an external file.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed external data (CSV, JSON).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
