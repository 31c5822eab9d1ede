//! The two sharing schemes as pure functions from a profile to a [`ShareResult`].

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::config::{peers, slot, AgentId, MechanismConfig, MechanismKind};
use crate::error::Result;
use crate::rational::Rational;
use crate::report::{DirectProfile, PredictionProfile, Profile, Report, StrategyProfile};
use crate::scoring::{distribution_from_histogram, nint, quadratic_score, Distribution};

/// Shares and every intermediate quantity behind them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShareResult {
    pub mechanism: MechanismKind,
    pub reward: Rational,
    /// `Γ_i`, indexed by agent id − 1.
    pub shares: Vec<Rational>,
    /// Peer evaluation: summed evaluations received. Peer prediction: mean
    /// expected evaluation received, `g_i / (n − 1)`.
    pub grades: Vec<Rational>,
    /// Peer prediction only: mean quadratic score of each agent's predictions.
    pub scores: Vec<Rational>,
    /// Peer prediction only: `g_i`, the summed expected evaluations received.
    pub expected_evaluations: Vec<Rational>,
    /// Peer prediction only: `[scorer][peer slot]` temporary grade of the peer,
    /// leaving out the scorer's own prediction.
    pub temporary_grades: Vec<Vec<Rational>>,
    /// Peer prediction only: the rounded temporary grades used as observed events.
    pub scored_events: Vec<Vec<u32>>,
    pub total: Rational,
    /// `V − Σ Γ_i`.
    pub surplus: Rational,
}

impl ShareResult {
    pub fn share(&self, agent: AgentId) -> &Rational {
        &self.shares[agent - 1]
    }

    /// Scored event of `scorer`'s prediction about `target`.
    pub fn scored_event(&self, scorer: AgentId, target: AgentId) -> u32 {
        self.scored_events[scorer - 1][slot(scorer, target)]
    }
}

/// A sharing scheme bound to a validated configuration.
pub trait SharingMechanism: Send + Sync {
    type Report: Report;

    fn config(&self) -> &MechanismConfig;

    fn kind(&self) -> MechanismKind {
        <Self::Report as Report>::KIND
    }

    /// Shares for `profile`, which is re-validated against this configuration.
    fn shares(&self, profile: &StrategyProfile<Self::Report>) -> Result<ShareResult>;
}

#[derive(Debug, Clone)]
pub struct PeerEvaluation {
    config: MechanismConfig,
}

impl PeerEvaluation {
    pub fn new(config: MechanismConfig) -> Result<Self> {
        config.validate(MechanismKind::PeerEvaluation)?;
        Ok(PeerEvaluation { config })
    }
}

impl SharingMechanism for PeerEvaluation {
    type Report = crate::report::DirectReport;

    fn config(&self) -> &MechanismConfig {
        &self.config
    }

    fn shares(&self, profile: &DirectProfile) -> Result<ShareResult> {
        profile.validate(&self.config)?;
        let cfg = &self.config;
        let n = cfg.n;

        let mut received = vec![0u64; n];
        for report in profile.reports() {
            for (target, value) in report.iter() {
                received[target - 1] += u64::from(value);
            }
        }

        let factor = &cfg.reward / (Rational::from(n) * Rational::from(cfg.cap));
        let grades: Vec<Rational> = received
            .iter()
            .map(|&g| Rational::from(num_bigint::BigInt::from(g)))
            .collect();
        let shares: Vec<Rational> = grades.iter().map(|g| g * &factor).collect();
        let total: Rational = shares.iter().sum();
        let surplus = &cfg.reward - &total;

        Ok(ShareResult {
            mechanism: MechanismKind::PeerEvaluation,
            reward: cfg.reward.clone(),
            shares,
            grades,
            scores: Vec::new(),
            expected_evaluations: Vec::new(),
            temporary_grades: Vec::new(),
            scored_events: Vec::new(),
            total,
            surplus,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PeerPrediction {
    config: MechanismConfig,
    alpha: Rational,
    /// `V / ((M + 2α)·n)`
    weight: Rational,
}

impl PeerPrediction {
    pub fn new(config: MechanismConfig) -> Result<Self> {
        config.validate(MechanismKind::PeerPrediction)?;
        let alpha = config.alpha_or_zero();
        let denom = (Rational::from(config.cap) + &alpha * Rational::from_integer(2)) * Rational::from(config.n);
        let weight = &config.reward / denom;
        Ok(PeerPrediction { config, alpha, weight })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    /// The normalizing weight `V / ((M + 2α)·n)` applied to `grade + α·score`.
    pub fn weight(&self) -> &Rational {
        &self.weight
    }
}

impl SharingMechanism for PeerPrediction {
    type Report = crate::report::PredictionReport;

    fn config(&self) -> &MechanismConfig {
        &self.config
    }

    fn shares(&self, profile: &PredictionProfile) -> Result<ShareResult> {
        profile.validate(&self.config)?;
        let cfg = &self.config;
        let n = cfg.n;
        let evaluators = (n - 1) as u32;
        let n_minus_1 = Rational::from(n - 1);
        let n_minus_2 = Rational::from(n - 2);

        // per scorer, per peer slot: predicted distribution and its mean
        let mut dists: Vec<Vec<Distribution>> = Vec::with_capacity(n);
        let mut means: Vec<Vec<Rational>> = Vec::with_capacity(n);
        for report in profile.reports() {
            let row = report
                .histograms()
                .iter()
                .map(|h| distribution_from_histogram(h, evaluators))
                .collect::<Result<Vec<_>>>()?;
            means.push(row.iter().map(Distribution::mean).collect());
            dists.push(row);
        }

        let expected_evaluations: Vec<Rational> = (1..=n)
            .map(|i| peers(n, i).map(|j| &means[j - 1][slot(j, i)]).sum())
            .collect();

        let mut scores = Vec::with_capacity(n);
        let mut temporary_grades = Vec::with_capacity(n);
        let mut scored_events = Vec::with_capacity(n);
        for i in 1..=n {
            let mut score_sum = Rational::zero();
            let mut temps = Vec::with_capacity(n - 1);
            let mut events = Vec::with_capacity(n - 1);
            for j in peers(n, i) {
                let s = slot(i, j);
                let temp = (&expected_evaluations[j - 1] - &means[i - 1][s]) / &n_minus_2;
                let event = nint(&temp);
                let event = event
                    .to_u32()
                    .filter(|&e| e <= cfg.cap)
                    .unwrap_or_else(|| panic!("scored event {event} outside 0..={}", cfg.cap));
                score_sum += quadratic_score(&dists[i - 1][s], event as usize)?;
                temps.push(temp);
                events.push(event);
            }
            scores.push(score_sum / &n_minus_1);
            temporary_grades.push(temps);
            scored_events.push(events);
        }

        let grades: Vec<Rational> = expected_evaluations.iter().map(|g| g / &n_minus_1).collect();
        let shares: Vec<Rational> = grades
            .iter()
            .zip(&scores)
            .map(|(grade, score)| (grade + &self.alpha * score) * &self.weight)
            .collect();
        let total: Rational = shares.iter().sum();
        debug_assert!(total <= cfg.reward, "shares {total} exceed reward {}", cfg.reward);
        let surplus = &cfg.reward - &total;

        Ok(ShareResult {
            mechanism: MechanismKind::PeerPrediction,
            reward: cfg.reward.clone(),
            shares,
            grades,
            scores,
            expected_evaluations,
            temporary_grades,
            scored_events,
            total,
            surplus,
        })
    }
}

pub fn peer_evaluation_shares(config: &MechanismConfig, profile: &DirectProfile) -> Result<ShareResult> {
    PeerEvaluation::new(config.clone())?.shares(profile)
}

pub fn peer_prediction_shares(config: &MechanismConfig, profile: &PredictionProfile) -> Result<ShareResult> {
    PeerPrediction::new(config.clone())?.shares(profile)
}

/// Dispatches on the profile kind.
pub fn compute_shares(config: &MechanismConfig, profile: &Profile) -> Result<ShareResult> {
    match profile {
        Profile::Direct(p) => peer_evaluation_shares(config, p),
        Profile::Prediction(p) => peer_prediction_shares(config, p),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetSummary {
    pub total: Rational,
    pub surplus: Rational,
    pub balanced: bool,
}

pub fn budget_summary(result: &ShareResult, config: &MechanismConfig) -> BudgetSummary {
    let total: Rational = result.shares.iter().sum();
    let surplus = &config.reward - &total;
    BudgetSummary {
        balanced: surplus.is_zero(),
        total,
        surplus,
    }
}
