//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "tensor is not antisymmetric: |X{index:?} + X{swapped:?}| = {violation:.3e} \
         exceeds tolerance {tolerance:.3e}"
    )]
    NotAntisymmetric {
        index: Vec<usize>,
        swapped: Vec<usize>,
        violation: f64,
        tolerance: f64,
    },

    #[error("tensor order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("dense tensor with {elements} entries exceeds the size cap {cap}")]
    TensorTooLarge { elements: u128, cap: usize },

    #[error("integer bound overflow: {0}")]
    BoundOverflow(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
