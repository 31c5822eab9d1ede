use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{peers, AgentId, MechanismConfig};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::report::{DirectProfile, DirectReport, PredictionProfile, PredictionReport, StrategyProfile};
use crate::sim::run_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Truths follow the quality weights exactly.
    Omniscient,
    /// Truths are seeded multinomial draws from the normalized weights.
    Sampled,
}

/// Hidden agent qualities from which true evaluations and predictions derive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldModel {
    pub quality_weights: Vec<Rational>,
    pub noise_mode: NoiseMode,
    #[serde(default)]
    pub seed: u64,
}

impl WorldModel {
    pub fn new(quality_weights: Vec<Rational>, noise_mode: NoiseMode, seed: u64) -> Result<Self> {
        let world = WorldModel { quality_weights, noise_mode, seed };
        world.validate(None)?;
        Ok(world)
    }

    pub fn uniform(n: usize, noise_mode: NoiseMode, seed: u64) -> Self {
        WorldModel { quality_weights: vec![Rational::one(); n], noise_mode, seed }
    }

    pub(crate) fn validate(&self, n: Option<usize>) -> Result<()> {
        if let Some(w) = self.quality_weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::InvalidSpec(format!("quality weight {w} is not positive")));
        }
        if let Some(n) = n {
            if self.quality_weights.len() != n {
                return Err(Error::InvalidSpec(format!(
                    "{} quality weights for {n} agents",
                    self.quality_weights.len()
                )));
            }
        }
        Ok(())
    }

    fn weight(&self, agent: AgentId) -> &Rational {
        &self.quality_weights[agent - 1]
    }
}

/// Largest-remainder apportionment of `total` seats proportional to
/// `weights`; remainder ties go to the earlier entry.
pub fn apportion(total: u32, weights: &[Rational]) -> Vec<u32> {
    let sum: Rational = weights.iter().sum();
    let quotas: Vec<Rational> = weights.iter().map(|w| w * Rational::from(total) / &sum).collect();
    let mut seats: Vec<u32> = quotas.iter().map(|q| q.floor().to_u32().unwrap_or(0)).collect();
    let assigned: u32 = seats.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    let remainder = |i: usize| &quotas[i] - Rational::from(BigInt::from(seats[i]));
    let remainders: Vec<Rational> = order.iter().map(|&i| remainder(i)).collect();
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));
    for &i in order.iter().take((total - assigned) as usize) {
        seats[i] += 1;
    }
    seats
}

/// Integer weights proportional to `weights` (scaled by the common denominator).
fn integer_weights(weights: &[&Rational]) -> Result<Vec<u64>> {
    let lcm = weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    weights
        .iter()
        .map(|w| {
            (w.numer() * (&lcm / w.denom()))
                .to_u64()
                .ok_or_else(|| Error::InvalidSpec("quality weights too fine-grained to sample".into()))
        })
        .collect()
}

/// `trials` categorical draws over `weights`; returns counts per category.
fn multinomial(rng: &mut ChaCha8Rng, trials: u32, weights: &[u64]) -> Vec<u32> {
    let total: u64 = weights.iter().sum();
    let mut counts = vec![0u32; weights.len()];
    for _ in 0..trials {
        let mut ticket = rng.gen_range(0..total);
        for (k, &w) in weights.iter().enumerate() {
            if ticket < w {
                counts[k] += 1;
                break;
            }
            ticket -= w;
        }
    }
    counts
}

fn direct_truth(world: &WorldModel, config: &MechanismConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<u32>>> {
    config
        .agents()
        .map(|i| {
            let weights: Vec<Rational> = peers(config.n, i).map(|j| world.weight(j).clone()).collect();
            Ok(match world.noise_mode {
                NoiseMode::Omniscient => apportion(config.cap, &weights),
                NoiseMode::Sampled => {
                    let ints = integer_weights(&weights.iter().collect::<Vec<_>>())?;
                    multinomial(rng, config.cap, &ints)
                }
            })
        })
        .collect()
}

/// True direct evaluations and true predictions for one draw of the world.
pub fn generate_truth(world: &WorldModel, config: &MechanismConfig) -> Result<(DirectProfile, PredictionProfile)> {
    generate_truth_with(world, config, &mut run_rng(world.seed, 0))
}

pub(crate) fn generate_truth_with(
    world: &WorldModel,
    config: &MechanismConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(DirectProfile, PredictionProfile)> {
    world.validate(Some(config.n))?;
    if config.strict_counts {
        return Err(Error::InvalidSpec("simulated truths do not support strict counts".into()));
    }
    let n = config.n;
    let direct = direct_truth(world, config, rng)?;
    let direct_profile = StrategyProfile::new(
        direct
            .iter()
            .enumerate()
            .map(|(i, v)| DirectReport::from_values(i + 1, v.clone(), config))
            .collect::<Result<Vec<_>>>()?,
        config,
    )?;

    // evaluation agent l gives agent j in the direct truths
    let given = |l: AgentId, j: AgentId| direct_profile.report(l).evaluation(j) as usize;
    let bins = config.bins();
    let prediction_reports = match world.noise_mode {
        NoiseMode::Omniscient => {
            // everyone knows the exact histogram each peer receives
            let received: Vec<Vec<u32>> = (1..=n)
                .map(|j| {
                    let mut h = vec![0u32; bins];
                    for l in peers(n, j) {
                        h[given(l, j)] += 1;
                    }
                    h
                })
                .collect();
            config
                .agents()
                .map(|i| {
                    let hists = peers(n, i).map(|j| received[j - 1].clone()).collect();
                    PredictionReport::from_histograms(i, hists, config)
                })
                .collect::<Result<Vec<_>>>()?
        }
        NoiseMode::Sampled => {
            let mut reports = Vec::with_capacity(n);
            for i in config.agents() {
                let mut hists = Vec::with_capacity(n - 1);
                for j in peers(n, i) {
                    // imagine each evaluator l of j splitting M points by weight
                    let mut h = vec![0u32; bins];
                    for l in peers(n, j) {
                        let targets: Vec<AgentId> = peers(n, l).collect();
                        let weights: Vec<&Rational> = targets.iter().map(|&t| world.weight(t)).collect();
                        let draw = multinomial(rng, config.cap, &integer_weights(&weights)?);
                        let pos = targets.iter().position(|&t| t == j).expect("j is a peer of l");
                        h[draw[pos] as usize] += 1;
                    }
                    hists.push(h);
                }
                reports.push(PredictionReport::from_histograms(i, hists, config)?);
            }
            reports
        }
    };
    let prediction_profile = StrategyProfile::new(prediction_reports, config)?;
    Ok((direct_profile, prediction_profile))
}
