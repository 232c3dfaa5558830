use thiserror::Error;

/// Errors raised by field construction and the numerical operators.
#[derive(Debug, Error)]
pub enum GaugeError {
    #[error("matrix size mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degree {degree} out of range for dimension {m}")]
    DegreeOutOfRange { degree: usize, m: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("functional undefined: dimension m={m} exceeds 2n={two_n}")]
    DimensionTooLarge { m: usize, two_n: usize },

    #[error("non-finite functional value {0} (diverged step)")]
    NonFinite(f64),

    #[error("unknown identity id `{0}`")]
    UnknownIdentity(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GaugeError>;
