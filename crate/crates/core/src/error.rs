use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension {0} outside 1..=24")]
    InvalidDimension(usize),

    #[error("bits above position {n} are set in {bits:#x}")]
    StrayBits { bits: u64, n: usize },

    #[error("not a Lagrangian subspace: {0}")]
    NotLagrangian(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("function has zero norm")]
    ZeroFunction,

    #[error("oracle budget exceeded: {routine} allows n <= {max}, got {n}")]
    BudgetExceeded {
        routine: &'static str,
        max: usize,
        n: usize,
    },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParam(msg.into())
}
