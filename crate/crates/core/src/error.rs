use thiserror::Error;

/// Errors raised by the planner library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("informed set is degenerate: no sample accepted after {tries} tries")]
    DegenerateInformedSet { tries: usize },

    #[error("degenerate vector (norm {norm:e} below epsilon)")]
    DegenerateVector { norm: f64 },

    #[error("invalid start state")]
    InvalidStart,

    #[error("invalid goal state")]
    InvalidGoal,

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, PlanError>;
