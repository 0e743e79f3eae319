use thiserror::Error;

/// Errors raised by the completion library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("sample {sample}: index {index:?} out of range for dims {dims:?}")]
    IndexOutOfRange {
        sample: usize,
        index: Vec<i64>,
        dims: Vec<usize>,
    },

    #[error("sample {sample}: index has {got} coordinates, tensor order is {expected}")]
    IndexArity {
        sample: usize,
        got: usize,
        expected: usize,
    },

    #[error("sample {sample}: value {value} is not finite")]
    NonFiniteValue { sample: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("truth tensor has zero Frobenius norm")]
    ZeroNormTruth,

    #[error("instance too large for exact oracle: rho = {rho} exceeds guard {guard}")]
    ExactOracleTooLarge { rho: usize, guard: usize },

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid variant: {0}")]
    InvalidVariant(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed instance file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("LP model line {line}: {msg}")]
    LpParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
