use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partition sums to {sum} but the matrix has dimension {n}")]
    PartitionMismatch { n: usize, sum: usize },

    #[error("dimension mismatch: expected {expected}x{expected}, found {rows}x{cols}")]
    DimensionMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("operator has non-finite entries")]
    NonFinite,

    #[error("operator is not hermitian (max |a - a*| = {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("operator is not positive (min eigenvalue = {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator is singular (sigma_min / sigma_max = {ratio:e})")]
    Singular { ratio: f64 },

    #[error("exponents must satisfy sum 1/p_j = 1, got {sum}")]
    BadExponents { sum: f64 },

    #[error("exponent {0} is out of range")]
    BadExponent(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
