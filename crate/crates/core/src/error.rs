use num_bigint::BigInt;
use thiserror::Error;

use crate::polytope::VertexRejection;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not unimodular (determinant {0})")]
    NotUnimodular(BigInt),
    #[error("invalid polytope: {0}")]
    InvalidPolytope(#[from] VertexRejection),
    #[error("quadratic form is not positive definite")]
    NotPositiveDefinite,
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("unsupported dimension {0}: exact successive minima are limited to n <= 4")]
    UnsupportedDimension(usize),
    #[error("{what} cap of {cap} exceeded")]
    CapExceeded { what: &'static str, cap: usize },
    #[error("invalid witness: {0}")]
    Witness(String),
    #[error("witness extraction failed: {0}")]
    Extraction(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
