use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("sector holds {count} configurations, above the enumeration limit of {limit}")]
    Capacity { count: u64, limit: u64 },

    #[error("configuration count does not fit in 64 bits")]
    Overflow,

    #[error("sector is empty")]
    EmptySector,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),
}
