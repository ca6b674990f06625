use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("undefined gcd: zero vector")]
    UndefinedGcd,

    #[error("not invertible: gcd({p}, {q}) > 1")]
    NotInvertible { p: i64, q: i64 },

    #[error("outside implemented domain: {0}")]
    OutsideDomain(String),

    #[error("invalid test set: {0}")]
    InvalidTestSet(String),

    #[error("test set too large for torus wrap: scaled diameter {diameter} >= 1")]
    TestSetTooLarge { diameter: f64 },

    #[error("level too small for test set: scaled diameter {diameter} >= 1 at level {level}")]
    LevelTooSmall { diameter: f64, level: i64 },

    #[error("estimated {points} points exceed the memory budget of {budget} bytes")]
    MemoryBudget { points: u64, budget: u64 },

    #[error("no reference points: the Farey set does not meet the region")]
    NoReferencePoints,

    #[error("not integrable: {0}")]
    NotIntegrable(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
