use thiserror::Error;

/// Errors produced by the library, grouped by category so callers can map
/// them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// An input violated a documented precondition or invariant.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A guarded exhaustive computation would exceed its capacity limit.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
