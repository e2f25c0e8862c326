use thiserror::Error;

/// Errors raised by code construction, encoding and decoding.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("frame with seed {seed:#018x} failed: {message}")]
    Frame { seed: u64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
