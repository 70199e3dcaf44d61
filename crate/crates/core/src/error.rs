use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IslError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("size limit exceeded: {what} is {actual}, limit {limit}")]
    SizeLimit { what: String, limit: usize, actual: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl IslError {
    pub fn size(what: impl Into<String>, limit: usize, actual: usize) -> Self {
        IslError::SizeLimit { what: what.into(), limit, actual }
    }
}

pub type Result<T, E = IslError> = std::result::Result<T, E>;
