use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("division by lambda failed: term with lambda power 0 present ({0})")]
    LambdaDivision(String),
    #[error("truncation order {given} too small; need at least {needed}")]
    TruncationTooSmall { given: u32, needed: u32 },
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid setup: {0}")]
    Setup(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
