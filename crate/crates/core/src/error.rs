use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("peak set is empty")]
    EmptyPeakSet,
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("neighbor count k={k} must be smaller than the point count {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("local Gram matrix of point {point} is singular")]
    SingularGram { point: usize },
    #[error("eigen-solver failed: {0}")]
    EigenFailure(String),
    #[error("cannot place {count} nodes on {n} grid points")]
    TooManyNodes { count: usize, n: usize },
    #[error("watershed produced no contour pixels")]
    EmptyContour,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
