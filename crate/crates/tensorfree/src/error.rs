use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("resource guard: {0}")]
    Resource(String),
    #[error("overflow: {0}")]
    Overflow(&'static str),
    #[error("refused: {0}")]
    Refused(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("incomplete table: {0}")]
    Incomplete(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
