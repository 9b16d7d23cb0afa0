use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopoError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("filtration is not monotone: {0}")]
    NonMonotone(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("input too large for exhaustive oracle: {size} > {limit}")]
    OracleTooLarge { size: usize, limit: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, TopoError>;

pub(crate) fn invalid<S: Into<String>>(msg: S) -> TopoError {
    TopoError::InvalidInput(msg.into())
}
