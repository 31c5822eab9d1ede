use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// 1-based agent identifier.
pub type AgentId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    /// Agents hand out direct evaluations summing to the cap.
    PeerEvaluation,
    /// Agents predict the histogram of evaluations each peer will receive.
    PeerPrediction,
}

impl MechanismKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MechanismKind::PeerEvaluation => "peer-evaluation",
            MechanismKind::PeerPrediction => "peer-prediction",
        }
    }

    pub fn min_agents(self) -> usize {
        match self {
            MechanismKind::PeerEvaluation => 2,
            // the temporary grade divides by n - 2
            MechanismKind::PeerPrediction => 3,
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "peer-evaluation" | "evaluation" | "direct" => Ok(MechanismKind::PeerEvaluation),
            "peer-prediction" | "prediction" => Ok(MechanismKind::PeerPrediction),
            other => Err(Error::Parse(format!("unknown mechanism {other:?}"))),
        }
    }
}

/// Parameters of one sharing instance: agent count, reward, evaluation cap and
/// (for peer prediction) the score weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub n: usize,
    #[serde(rename = "V")]
    pub reward: Rational,
    #[serde(rename = "M")]
    pub cap: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Rational>,
    /// Additionally require every histogram bin to hold at least one count.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub strict_counts: bool,
}

impl MechanismConfig {
    pub fn peer_evaluation(n: usize, reward: impl Into<Rational>, cap: u32) -> Self {
        MechanismConfig {
            n,
            reward: reward.into(),
            cap,
            alpha: None,
            strict_counts: false,
        }
    }

    pub fn peer_prediction(
        n: usize,
        reward: impl Into<Rational>,
        cap: u32,
        alpha: impl Into<Rational>,
    ) -> Self {
        MechanismConfig {
            n,
            reward: reward.into(),
            cap,
            alpha: Some(alpha.into()),
            strict_counts: false,
        }
    }

    pub fn with_alpha(&self, alpha: Rational) -> Self {
        MechanismConfig {
            alpha: Some(alpha),
            ..self.clone()
        }
    }

    pub fn with_strict_counts(mut self, strict: bool) -> Self {
        self.strict_counts = strict;
        self
    }

    /// Score weight; zero when absent (only meaningful after validation).
    pub fn alpha_or_zero(&self) -> Rational {
        self.alpha.clone().unwrap_or_else(Rational::zero)
    }

    /// Number of bins in a prediction histogram, `M + 1`.
    pub fn bins(&self) -> usize {
        self.cap as usize + 1
    }

    /// Iterates the agent ids 1..=n.
    pub fn agents(&self) -> std::ops::RangeInclusive<AgentId> {
        1..=self.n
    }

    pub fn validate(&self, kind: MechanismKind) -> Result<()> {
        validate_config(self, kind)
    }
}

pub fn validate_config(config: &MechanismConfig, kind: MechanismKind) -> Result<()> {
    let cap_too_big = Rational::from(config.cap) > config.reward;
    if config.cap == 0 || cap_too_big {
        return Err(Error::CapOutOfRange {
            cap: config.cap,
            reward: config.reward.to_string(),
        });
    }
    let minimum = kind.min_agents();
    if config.n < minimum {
        return Err(Error::TooFewAgents { n: config.n, minimum });
    }
    // every bin needs a count, so there must be at least M + 1 evaluators
    if config.strict_counts && kind == MechanismKind::PeerPrediction && config.n - 1 < config.bins() {
        return Err(Error::TooFewAgents { n: config.n, minimum: config.bins() + 1 });
    }
    match (&config.alpha, kind) {
        (Some(alpha), _) if !alpha.is_positive() => Err(Error::NonPositiveAlpha(alpha.to_string())),
        (None, MechanismKind::PeerPrediction) => Err(Error::MissingAlpha),
        _ => Ok(()),
    }
}

/// Peers of `owner` in ascending order.
pub fn peers(n: usize, owner: AgentId) -> impl Iterator<Item = AgentId> + Clone {
    (1..=n).filter(move |&j| j != owner)
}

/// Position of `target` within `owner`'s dense report vector.
pub fn slot(owner: AgentId, target: AgentId) -> usize {
    debug_assert_ne!(owner, target);
    if target < owner {
        target - 1
    } else {
        target - 2
    }
}
