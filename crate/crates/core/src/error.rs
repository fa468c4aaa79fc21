use thiserror::Error;

/// Errors raised by allocation, synthesis, estimation and analysis routines.
#[derive(Debug, Error)]
pub enum IsacError {
    #[error("invalid OFDM parameters: {0}")]
    InvalidParams(String),

    #[error("active subcarrier count {got} outside [{min}, {max}]")]
    Cardinality { got: usize, min: usize, max: usize },

    #[error("{pattern} pattern needs max index {max_index}, but N - 1 = {limit}")]
    PatternOverflow {
        pattern: &'static str,
        max_index: usize,
        limit: usize,
    },

    #[error("co-prime pattern requires gcd(p, q) = 1, got p = {p}, q = {q}")]
    NotCoprime { p: usize, q: usize },

    #[error("invalid pattern parameters: {0}")]
    InvalidPattern(String),

    #[error("subcarrier index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("allocation has fewer than two active subcarriers")]
    TooFewActive,

    #[error("allocation is empty")]
    EmptyAllocation,

    #[error("allocation varies across symbols; a fixed subcarrier set is required")]
    NonConstantAllocation,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("Fisher information matrix is singular (fewer than two distinct subcarriers)")]
    SingularFim,

    #[error("virtual signals were built on different apertures")]
    ApertureMismatch,

    #[error("every periodogram bin lies inside the mainlobe exclusion zone")]
    NoSidelobes,

    #[error("unknown method tag `{0}`")]
    UnknownMethod(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, IsacError>;
