use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for {len} dimensions")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("unknown transaction id {0}")]
    UnknownTx(u64),

    #[error("instance too large for {solver}: {detail}")]
    InstanceTooLarge { solver: &'static str, detail: String },

    #[error("branch-and-bound node budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("tip {tip} is outside the attainable range of the {family} family")]
    UnattainableTip { tip: f64, family: &'static str },

    #[error("no root found while bracketing stable prices")]
    NoRoot,

    #[error("stable price iteration did not converge")]
    NoConvergence,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("series truncation did not converge")]
    TruncationFailure,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
