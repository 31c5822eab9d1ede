use std::collections::BTreeMap;
use std::io::Write;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{MechanismConfig, MechanismKind};
use crate::error::{Error, Result};
use crate::mechanisms::{PeerEvaluation, PeerPrediction, SharingMechanism};
use crate::rational::Rational;
use crate::report::StrategyProfile;
use crate::sim::world::generate_truth_with;
use crate::sim::{run_rng, AgentPolicy, WorldModel};

/// Everything needed to reproduce a batch of simulated sharing rounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub mechanism: MechanismKind,
    pub config: MechanismConfig,
    pub world: WorldModel,
    /// One policy per agent, in id order.
    pub policies: Vec<AgentPolicy>,
    pub runs: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let spec_err = |e: Error| Error::InvalidSpec(e.to_string());
        self.config.validate(self.mechanism).map_err(spec_err)?;
        self.world.validate(Some(self.config.n))?;
        if self.config.strict_counts {
            return Err(Error::InvalidSpec("strict counts are not supported in simulation".into()));
        }
        if self.policies.len() != self.config.n {
            return Err(Error::InvalidSpec(format!(
                "{} policies for {} agents",
                self.policies.len(),
                self.config.n
            )));
        }
        for (idx, policy) in self.policies.iter().enumerate() {
            policy.validate(idx + 1, self.config.n)?;
        }
        if self.runs == 0 {
            return Err(Error::InvalidSpec("runs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub run: u64,
    pub shares: Vec<Rational>,
    /// Shares had every agent reported its truth in this run.
    pub truthful_shares: Vec<Rational>,
    pub surplus: Rational,
    /// Summed share change of all agents following each policy, by label.
    pub policy_gains: BTreeMap<&'static str, Rational>,
}

impl RunRecord {
    pub fn delta(&self, agent: usize) -> Rational {
        &self.shares[agent - 1] - &self.truthful_shares[agent - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyStats {
    pub policy: &'static str,
    pub agents: usize,
    pub mean_gain: Rational,
    pub min_gain: Rational,
    pub max_gain: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub runs: Vec<RunRecord>,
    pub policy_stats: Vec<PolicyStats>,
}

/// Runs every round of `spec`. Rounds use independent random streams and may
/// execute on `workers` threads; results are always in run order.
pub fn run_experiment(spec: &ExperimentSpec, workers: Option<usize>) -> Result<ExperimentReport> {
    spec.validate()?;
    let run_all = || -> Result<Vec<RunRecord>> {
        (0..spec.runs)
            .into_par_iter()
            .map(|run| simulate_run(spec, run))
            .collect()
    };
    let runs = match workers {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::InvalidSpec(e.to_string()))?
            .install(run_all)?,
        None => run_all()?,
    };
    let policy_stats = aggregate(spec, &runs);
    Ok(ExperimentReport { spec: spec.clone(), runs, policy_stats })
}

fn simulate_run(spec: &ExperimentSpec, run: u64) -> Result<RunRecord> {
    let mut rng = run_rng(spec.world.seed, run);
    let (direct_truth, prediction_truth) = generate_truth_with(&spec.world, &spec.config, &mut rng)?;
    let (result, truthful) = match spec.mechanism {
        MechanismKind::PeerEvaluation => {
            let mech = PeerEvaluation::new(spec.config.clone())?;
            play(&mech, &direct_truth, spec, &mut rng, AgentPolicy::direct_report)?
        }
        MechanismKind::PeerPrediction => {
            let mech = PeerPrediction::new(spec.config.clone())?;
            play(&mech, &prediction_truth, spec, &mut rng, AgentPolicy::prediction_report)?
        }
    };

    let mut policy_gains = BTreeMap::new();
    for (idx, policy) in spec.policies.iter().enumerate() {
        let delta = &result.shares[idx] - &truthful.shares[idx];
        *policy_gains.entry(policy.label()).or_insert_with(Rational::zero) += delta;
    }
    Ok(RunRecord {
        run,
        shares: result.shares,
        truthful_shares: truthful.shares,
        surplus: result.surplus,
        policy_gains,
    })
}

type ReportFn<R> = fn(&AgentPolicy, &R, &MechanismConfig, &mut ChaCha8Rng) -> Result<R>;

fn play<M: SharingMechanism>(
    mech: &M,
    truth: &StrategyProfile<M::Report>,
    spec: &ExperimentSpec,
    rng: &mut ChaCha8Rng,
    report_for: ReportFn<M::Report>,
) -> Result<(crate::mechanisms::ShareResult, crate::mechanisms::ShareResult)> {
    let reports = spec
        .policies
        .iter()
        .zip(truth.reports())
        .map(|(policy, t)| report_for(policy, t, &spec.config, rng))
        .collect::<Result<Vec<_>>>()?;
    let played = StrategyProfile::new(reports, &spec.config)?;
    Ok((mech.shares(&played)?, mech.shares(truth)?))
}

fn aggregate(spec: &ExperimentSpec, runs: &[RunRecord]) -> Vec<PolicyStats> {
    let mut agents: BTreeMap<&'static str, usize> = BTreeMap::new();
    for p in &spec.policies {
        *agents.entry(p.label()).or_default() += 1;
    }
    agents
        .into_iter()
        .map(|(policy, count)| {
            let gains: Vec<&Rational> = runs.iter().map(|r| &r.policy_gains[policy]).collect();
            let total: Rational = gains.iter().copied().sum();
            PolicyStats {
                policy,
                agents: count,
                mean_gain: total / Rational::from(gains.len()),
                min_gain: gains.iter().copied().min().cloned().unwrap_or_default(),
                max_gain: gains.iter().copied().max().cloned().unwrap_or_default(),
            }
        })
        .collect()
}

const RUN_COLUMNS: [&str; 18] = [
    "run",
    "mechanism",
    "n",
    "V",
    "M",
    "alpha",
    "seed",
    "agent",
    "policy",
    "share",
    "share_decimal",
    "truthful_share",
    "delta",
    "delta_decimal",
    "surplus",
    "surplus_decimal",
    "policy_gain",
    "policy_gain_decimal",
];

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out)
}

impl ExperimentReport {
    /// One row per (run, agent), RFC 4180, fixed column order.
    pub fn write_csv<W: Write>(&self, out: W, precision: usize) -> Result<()> {
        let spec = &self.spec;
        let mut w = csv_writer(out);
        w.write_record(RUN_COLUMNS)?;
        let alpha = spec.config.alpha.as_ref().map(ToString::to_string).unwrap_or_default();
        for run in &self.runs {
            for (idx, policy) in spec.policies.iter().enumerate() {
                let agent = idx + 1;
                let delta = run.delta(agent);
                let gain = &run.policy_gains[policy.label()];
                w.write_record([
                    run.run.to_string(),
                    spec.mechanism.to_string(),
                    spec.config.n.to_string(),
                    spec.config.reward.to_string(),
                    spec.config.cap.to_string(),
                    alpha.clone(),
                    spec.world.seed.to_string(),
                    agent.to_string(),
                    policy.label().to_string(),
                    run.shares[idx].to_string(),
                    run.shares[idx].to_decimal_string(precision),
                    run.truthful_shares[idx].to_string(),
                    delta.to_string(),
                    delta.to_decimal_string(precision),
                    run.surplus.to_string(),
                    run.surplus.to_decimal_string(precision),
                    gain.to_string(),
                    gain.to_decimal_string(precision),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Per-policy aggregates across runs.
    pub fn write_summary_csv<W: Write>(&self, out: W, precision: usize) -> Result<()> {
        let mut w = csv_writer(out);
        w.write_record(["policy", "agents", "runs", "mean_gain", "mean_gain_decimal", "min_gain", "max_gain"])?;
        for s in &self.policy_stats {
            w.write_record([
                s.policy.to_string(),
                s.agents.to_string(),
                self.runs.len().to_string(),
                s.mean_gain.to_string(),
                s.mean_gain.to_decimal_string(precision),
                s.min_gain.to_string(),
                s.max_gain.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn stats(&self, policy: &str) -> Option<&PolicyStats> {
        self.policy_stats.iter().find(|s| s.policy == policy)
    }
}
