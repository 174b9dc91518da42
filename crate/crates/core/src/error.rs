use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),

    #[error("outcome rank {rank} out of range (outcome count {count})")]
    InvalidRank { rank: usize, count: usize },

    #[error("unknown factor id {0}")]
    UnknownFactor(usize),

    #[error("variable `{name}` does not live on this space: {reason}")]
    SpaceMismatch { name: String, reason: String },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },

    #[error("space too large: {0}")]
    SpaceTooLarge(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("block for conditioning value {0} has zero probability")]
    DegenerateBlock(u32),

    #[error("variables are not structurally independent; precondition requires independence")]
    NotStructural,

    #[error("variables are structurally independent; precondition requires dependence")]
    IsStructural,

    #[error("invalid perturbation: {0}")]
    BadPerturbation(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid dag: {0}")]
    InvalidDag(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
