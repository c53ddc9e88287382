use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated input: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown filter `{0}`")]
    UnknownFilter(String),

    #[error("invalid packet: {0}")]
    InvalidPacket(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
