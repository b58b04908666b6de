use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("destination unreachable from source")]
    DestinationUnreachable,

    #[error("no routable instance after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("empty edge set")]
    EmptyEdgeSet,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("spin {index} is {value}, expected -1 or +1")]
    InvalidSpin { index: usize, value: i8 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("oracle infeasible at this scale: more than {limit} simple paths")]
    TooManyPaths { limit: usize },

    #[error("oracle infeasible at this scale: search exceeded {steps} steps")]
    SearchBudgetExceeded { steps: usize },

    #[error("dimension {dimension} exceeds brute-force cap {cap}")]
    DimensionTooLarge { dimension: usize, cap: usize },

    #[error("non-finite amplitude at step {step}, spin {spin}")]
    NonFinite { step: usize, spin: usize },
}
