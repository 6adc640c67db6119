use thiserror::Error;

/// Errors raised by the numerical and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("value {value} outside the domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("index {index} out of range for {n} particles")]
    Index { index: usize, n: usize },

    #[error("particle counts differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("polynomial degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("eigen-solver failure: {0}")]
    EigenSolver(String),

    #[error("function is not a sum of single-coordinate terms (residual norm^2 {0})")]
    NotInSingleCoordinateSpace(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
