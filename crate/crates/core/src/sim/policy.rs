use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{peers, AgentId, MechanismConfig};
use crate::error::{Error, Result};
use crate::report::{DirectReport, PredictionReport, Report};

/// Scripted behavior mapping an agent's truth to the report it submits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AgentPolicy {
    Truthful,
    /// A uniformly random valid report, ignoring the truth.
    UniformRandom,
    /// Talks up `favored` as far as possible and everyone else down.
    GreedyLiar { favored: AgentId },
    /// Inflates its assessment of `partner`, leaving other peers truthful:
    /// all `M` points in direct form, or one count moved from the lowest
    /// occupied bin to bin `M` in prediction form.
    ColluderPair { partner: AgentId },
}

impl AgentPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            AgentPolicy::Truthful => "truthful",
            AgentPolicy::UniformRandom => "uniform-random",
            AgentPolicy::GreedyLiar { .. } => "greedy-liar",
            AgentPolicy::ColluderPair { .. } => "colluder-pair",
        }
    }

    pub(crate) fn validate(&self, owner: AgentId, n: usize) -> Result<()> {
        let other = match self {
            AgentPolicy::GreedyLiar { favored } => *favored,
            AgentPolicy::ColluderPair { partner } => *partner,
            _ => return Ok(()),
        };
        if other == owner || other == 0 || other > n {
            return Err(Error::InvalidSpec(format!(
                "agent {owner}: {} must reference a distinct agent in 1..={n}, got {other}",
                self.label()
            )));
        }
        Ok(())
    }

    pub fn direct_report(
        &self,
        truth: &DirectReport,
        config: &MechanismConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<DirectReport> {
        let owner = truth.owner();
        let all_to = |target: AgentId| {
            let values = peers(config.n, owner)
                .map(|j| if j == target { config.cap } else { 0 })
                .collect();
            DirectReport::from_values(owner, values, config)
        };
        match self {
            AgentPolicy::Truthful => Ok(truth.clone()),
            AgentPolicy::UniformRandom => {
                DirectReport::from_values(owner, random_composition(rng, config.cap, config.n - 1), config)
            }
            AgentPolicy::GreedyLiar { favored } => all_to(*favored),
            AgentPolicy::ColluderPair { partner } => all_to(*partner),
        }
    }

    pub fn prediction_report(
        &self,
        truth: &PredictionReport,
        config: &MechanismConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<PredictionReport> {
        let owner = truth.owner();
        let evaluators = (config.n - 1) as u32;
        let point = |bin: usize| {
            let mut h = vec![0u32; config.bins()];
            h[bin] = evaluators;
            h
        };
        match self {
            AgentPolicy::Truthful => Ok(truth.clone()),
            AgentPolicy::UniformRandom => {
                let hists = (0..config.n - 1)
                    .map(|_| random_composition(rng, evaluators, config.bins()))
                    .collect();
                PredictionReport::from_histograms(owner, hists, config)
            }
            AgentPolicy::GreedyLiar { favored } => {
                let hists = peers(config.n, owner)
                    .map(|j| if j == *favored { point(config.cap as usize) } else { point(0) })
                    .collect();
                PredictionReport::from_histograms(owner, hists, config)
            }
            AgentPolicy::ColluderPair { partner } => {
                let mut hist = truth.histogram(*partner).to_vec();
                let top = config.cap as usize;
                if let Some(low) = hist[..top].iter().position(|&c| c > 0) {
                    hist[low] -= 1;
                    hist[top] += 1;
                }
                let hists = peers(config.n, owner)
                    .map(|j| if j == *partner { hist.clone() } else { truth.histogram(j).to_vec() })
                    .collect();
                PredictionReport::from_histograms(owner, hists, config)
            }
        }
    }
}

/// Uniform draw from the compositions of `total` into `parts` nonnegative
/// parts (stars and bars).
fn random_composition(rng: &mut ChaCha8Rng, total: u32, parts: usize) -> Vec<u32> {
    let slots = total as usize + parts - 1;
    let mut bars = index::sample(rng, slots, parts - 1).into_vec();
    bars.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0usize;
    for b in bars {
        out.push((b - prev) as u32);
        prev = b + 1;
    }
    out.push((slots - prev) as u32);
    out
}
