use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{belief_consistent_baseline, expected_shares, Belief, ReportSpace, SizeCap};
use crate::config::{peers, AgentId, MechanismConfig, MechanismKind};
use crate::error::{Error, Result};
use crate::mechanisms::PeerPrediction;
use crate::rational::Rational;
use crate::report::{PredictionProfile, PredictionReport, Report, StrategyProfile};

/// An inflating deviation by `liar` in favor of `beneficiary`, with the
/// resulting expected-share changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollusionOpportunity<R> {
    pub liar: AgentId,
    pub beneficiary: AgentId,
    pub deviation: R,
    /// Position of `deviation` among the pair's inflating deviations.
    pub deviation_rank: usize,
    pub liar_delta: Rational,
    pub beneficiary_delta: Rational,
    pub joint_gain: Rational,
    /// Open interval of side payments `p` leaving both strictly better off:
    /// `(−liar_delta, beneficiary_delta)`; `None` when `joint_gain ≤ 0`.
    pub side_payment_window: Option<(Rational, Rational)>,
}

impl<R> CollusionOpportunity<R> {
    fn new(
        liar: AgentId,
        beneficiary: AgentId,
        deviation: R,
        deviation_rank: usize,
        liar_delta: Rational,
        beneficiary_delta: Rational,
    ) -> Self {
        let joint_gain = &liar_delta + &beneficiary_delta;
        let side_payment_window = joint_gain
            .is_positive()
            .then(|| (-&liar_delta, beneficiary_delta.clone()));
        CollusionOpportunity {
            liar,
            beneficiary,
            deviation,
            deviation_rank,
            liar_delta,
            beneficiary_delta,
            joint_gain,
            side_payment_window,
        }
    }

    pub fn is_profitable(&self) -> bool {
        self.joint_gain.is_positive()
    }
}

/// What the liar believes about everyone else while contemplating a deviation.
#[derive(Debug, Clone)]
pub enum CollusionBaseline<R> {
    /// A known truthful profile; each liar holds a point belief on the rest.
    Profile(StrategyProfile<R>),
    /// Truthful reports plus one belief per agent (`beliefs[i − 1]` is agent `i`'s).
    Beliefs {
        truthful: StrategyProfile<R>,
        beliefs: Vec<Belief<R>>,
    },
}

impl<R: Report> CollusionBaseline<R> {
    fn truthful(&self) -> &StrategyProfile<R> {
        match self {
            CollusionBaseline::Profile(p) => p,
            CollusionBaseline::Beliefs { truthful, .. } => truthful,
        }
    }

    fn belief(&self, agent: AgentId) -> Belief<R> {
        match self {
            CollusionBaseline::Profile(p) => Belief::from_profile(p, agent),
            CollusionBaseline::Beliefs { beliefs, .. } => beliefs[agent - 1].clone(),
        }
    }
}

/// Restricts a scan to selected `(liar, beneficiary)` pairs.
pub type PairFilter<'a> = &'a (dyn Fn(AgentId, AgentId) -> bool + Sync);

/// Every inflating single-target deviation for every ordered pair, profitable
/// or not, sorted by `(liar, beneficiary, deviation rank)`.
pub fn collusion_candidates<M: ReportSpace>(
    mechanism: &M,
    baseline: &CollusionBaseline<M::Report>,
    pair_filter: Option<PairFilter<'_>>,
    cap: SizeCap,
) -> Result<Vec<CollusionOpportunity<M::Report>>> {
    let cfg = mechanism.config();
    let n = cfg.n;
    let truthful = baseline.truthful();
    truthful.validate(cfg)?;
    if let CollusionBaseline::Beliefs { beliefs, .. } = baseline {
        if beliefs.len() != n {
            return Err(Error::InvalidBelief(format!("need {n} beliefs, got {}", beliefs.len())));
        }
    }

    // (liar, beneficiary, rank, deviation)
    let mut jobs = Vec::new();
    let mut work: u128 = 0;
    for liar in 1..=n {
        let support = baseline.belief(liar).support().len() as u128;
        for beneficiary in peers(n, liar) {
            if pair_filter.is_some_and(|f| !f(liar, beneficiary)) {
                continue;
            }
            let devs = mechanism.inflating_deviations(truthful.report(liar), beneficiary, cap)?;
            work = work.saturating_add((devs.len() as u128 + 1).saturating_mul(support));
            cap.check(work)?;
            jobs.extend(devs.into_iter().enumerate().map(|(rank, d)| (liar, beneficiary, rank, d)));
        }
    }

    let baselines = (1..=n)
        .into_par_iter()
        .map(|liar| {
            let belief = baseline.belief(liar);
            let shares = expected_shares(mechanism, &belief, truthful.report(liar), liar)?;
            Ok((belief, shares))
        })
        .collect::<Result<Vec<_>>>()?;

    jobs.into_par_iter()
        .map(|(liar, beneficiary, rank, deviation)| {
            let (belief, before) = &baselines[liar - 1];
            let after = expected_shares(mechanism, belief, &deviation, liar)?;
            let liar_delta = &after[liar - 1] - &before[liar - 1];
            let beneficiary_delta = &after[beneficiary - 1] - &before[beneficiary - 1];
            Ok(CollusionOpportunity::new(liar, beneficiary, deviation, rank, liar_delta, beneficiary_delta))
        })
        .collect()
}

/// Profitable collusions: inflating deviations with positive joint gain.
pub fn collusion_scan<M: ReportSpace>(
    mechanism: &M,
    baseline: &CollusionBaseline<M::Report>,
    pair_filter: Option<PairFilter<'_>>,
    cap: SizeCap,
) -> Result<Vec<CollusionOpportunity<M::Report>>> {
    let mut all = collusion_candidates(mechanism, baseline, pair_filter, cap)?;
    all.retain(CollusionOpportunity::is_profitable);
    Ok(all)
}

/// Truthful predictions used when none are supplied: one count on bin 0 and
/// the remaining `n − 2` on bin `⌊M/2⌋` (with strict counts: one per bin,
/// surplus on `⌊M/2⌋`). Bin 0 stays occupied so the full-range shift exists.
pub fn default_truthful_predictions(config: &MechanismConfig) -> Result<PredictionProfile> {
    config.validate(MechanismKind::PeerPrediction)?;
    let evaluators = (config.n - 1) as u32;
    let mid = (config.cap / 2) as usize;
    let mut hist = vec![0u32; config.bins()];
    if config.strict_counts {
        hist.iter_mut().for_each(|c| *c = 1);
        hist[mid] += evaluators - config.bins() as u32;
    } else {
        hist[0] = 1;
        hist[mid] += evaluators - 1;
    }
    let reports = config
        .agents()
        .map(|i| PredictionReport::uniform(i, hist.clone(), config))
        .collect::<Result<Vec<_>>>()?;
    StrategyProfile::new(reports, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resistance {
    /// Some inflating deviation has positive joint gain.
    NotResistant,
    /// No profitable deviation, but some deviation breaks exactly even.
    Boundary,
    /// Every inflating deviation strictly lowers the pair's joint share.
    Resistant,
}

impl fmt::Display for Resistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resistance::NotResistant => "false",
            Resistance::Boundary => "boundary",
            Resistance::Resistant => "true",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdRow {
    pub alpha: Rational,
    /// `M(n − 1)/2`
    pub bound: Rational,
    pub resistance: Resistance,
    /// Deviation with the largest joint gain (first in scan order on ties).
    pub worst: Option<CollusionOpportunity<PredictionReport>>,
    pub profitable: usize,
    pub candidates: usize,
}

/// Sweeps the score weight and scans every pair under belief-consistent
/// baselines. `truthful` defaults to [`default_truthful_predictions`].
pub fn threshold_check(
    config_base: &MechanismConfig,
    alphas: &[Rational],
    truthful: Option<&PredictionProfile>,
    cap: SizeCap,
) -> Result<Vec<ThresholdRow>> {
    let bound = Rational::from(config_base.cap) * Rational::from(config_base.n - 1) / Rational::from_integer(2);
    let mut rows = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let config = config_base.with_alpha(alpha.clone());
        let mechanism = PeerPrediction::new(config.clone())?;
        let truthful = match truthful {
            Some(t) => t.clone(),
            None => default_truthful_predictions(&config)?,
        };
        let beliefs = config
            .agents()
            .map(|agent| belief_consistent_baseline(&mechanism, &truthful, agent))
            .collect::<Result<Vec<_>>>()?;
        let baseline = CollusionBaseline::Beliefs { truthful, beliefs };
        let candidates = collusion_candidates(&mechanism, &baseline, None, cap)?;

        let mut worst: Option<&CollusionOpportunity<PredictionReport>> = None;
        for c in &candidates {
            if worst.is_none_or(|w| c.joint_gain > w.joint_gain) {
                worst = Some(c);
            }
        }
        let resistance = match worst.map(|w| &w.joint_gain) {
            Some(g) if g.is_positive() => Resistance::NotResistant,
            Some(g) if g.is_zero() => Resistance::Boundary,
            _ => Resistance::Resistant,
        };
        rows.push(ThresholdRow {
            alpha: alpha.clone(),
            bound: bound.clone(),
            resistance,
            worst: worst.cloned(),
            profitable: candidates.iter().filter(|c| c.is_profitable()).count(),
            candidates: candidates.len(),
        });
    }
    Ok(rows)
}
