use thiserror::Error;

use crate::config::AgentId;

/// Every failure the library can report.
///
/// `Display` renders a single machine-readable line: the variant name followed
/// by `key=value` pairs, e.g. `SumMismatch agent=1`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("CapOutOfRange cap={cap} reward={reward}")]
    CapOutOfRange { cap: u32, reward: String },
    #[error("TooFewAgents n={n} minimum={minimum}")]
    TooFewAgents { n: usize, minimum: usize },
    #[error("NonPositiveAlpha alpha={0}")]
    NonPositiveAlpha(String),
    #[error("MissingAlpha")]
    MissingAlpha,

    #[error("SumMismatch agent={agent} expected={expected} found={found}")]
    SumMismatch { agent: AgentId, expected: u64, found: u64 },
    #[error("EntryOutOfRange agent={agent} target={target} value={value}")]
    EntryOutOfRange { agent: AgentId, target: AgentId, value: u64 },
    #[error("SelfEvaluationPresent agent={agent}")]
    SelfEvaluationPresent { agent: AgentId },
    #[error("MissingTarget agent={agent} target={target}")]
    MissingTarget { agent: AgentId, target: AgentId },
    #[error("UnknownTarget agent={agent} target={target}")]
    UnknownTarget { agent: AgentId, target: String },
    #[error("HistogramLength agent={agent} target={target} expected={expected} found={found}")]
    HistogramLength { agent: AgentId, target: AgentId, expected: usize, found: usize },
    #[error("ReportKindMismatch agent={agent} expected={expected}")]
    ReportKindMismatch { agent: AgentId, expected: &'static str },
    #[error("ReportCount expected={expected} found={found}")]
    ReportCount { expected: usize, found: usize },
    #[error("AgentMismatch slot={slot} owner={owner}")]
    AgentMismatch { slot: AgentId, owner: AgentId },
    #[error("ConfigMismatch {0}")]
    ConfigMismatch(String),

    #[error("OutcomeOutOfRange outcome={outcome} outcomes={outcomes}")]
    OutcomeOutOfRange { outcome: usize, outcomes: usize },
    #[error("TotalMismatch expected={expected} found={found}")]
    TotalMismatch { expected: u64, found: u64 },
    #[error("InvalidDistribution {0}")]
    InvalidDistribution(String),

    #[error("SizeLimitExceeded requested={requested} cap={cap}")]
    SizeLimitExceeded { requested: String, cap: u64 },
    #[error("InvalidBelief {0}")]
    InvalidBelief(String),
    #[error("InvalidReport {0}")]
    InvalidReport(String),
    #[error("BeliefConstructionInfeasible target={target} event={event}")]
    BeliefConstructionInfeasible { target: AgentId, event: u32 },

    #[error("InvalidSpec {0}")]
    InvalidSpec(String),
    #[error("InvalidNumber value={0:?}")]
    InvalidNumber(String),
    #[error("Parse {0}")]
    Parse(String),
    #[error("Io {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SizeLimitExceeded { .. } | Error::BeliefConstructionInfeasible { .. } => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
