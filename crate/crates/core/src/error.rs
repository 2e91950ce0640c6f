use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("population is fixed (all {size} sites advantaged); no further steps")]
    Fixated { size: usize },

    #[error("step event inconsistent with state: {0}")]
    InconsistentEvent(String),

    #[error("simulation exceeded max_steps = {max_steps} before fixation")]
    MaxStepsExceeded { max_steps: u64 },

    #[error("replication {index} failed: {source}")]
    Replication {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("index k = {k} out of range for N = {n} (need 1 <= k <= N-1)")]
    OutOfRange { k: u64, n: u64 },

    #[error("rational arithmetic exceeded its budget: {0}")]
    RationalBudget(String),

    #[error("no trials matched the conditioning event (jump = {jump}) in {trials} trials")]
    NoMatchingTrials { jump: bool, trials: u64 },

    #[error("empty sample")]
    EmptySample,

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error comes from a resource cap rather than bad input.
    pub fn is_resource_limit(&self) -> bool {
        match self {
            Error::MaxStepsExceeded { .. } | Error::RationalBudget(_) => true,
            Error::Replication { source, .. } => source.is_resource_limit(),
            _ => false,
        }
    }
}
