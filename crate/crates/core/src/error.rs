use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{a} is not invertible modulo {n}")]
    NotInvertible { a: i64, n: u64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("non-integer exponent at (m={m}, h={h})")]
    NonInteger { m: u64, h: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
