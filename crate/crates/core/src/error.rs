use thiserror::Error;

/// Errors raised by the receiver components.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bit vector length {len} is not a multiple of {bits_per_symbol} bits per symbol")]
    BitLength { len: usize, bits_per_symbol: usize },

    #[error("unsupported constellation order {0} (expected 4, 16 or 64)")]
    UnsupportedOrder(usize),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),

    #[error("correlation coefficient {0} outside [0, 1)")]
    Correlation(f64),

    #[error("matrix is not positive definite even after jitter")]
    Factorization,

    #[error("exhaustive search over {0} candidates exceeds the 2^20 guard")]
    SearchTooLarge(u128),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid document: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
