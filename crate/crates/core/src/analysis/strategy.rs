use rayon::prelude::*;

use crate::analysis::{expected_shares, feasible_histograms, Belief, ProfileSpace, ReportSpace, SizeCap};
use crate::config::{AgentId, MechanismConfig, MechanismKind};
use crate::error::{Error, Result};
use crate::mechanisms::{PeerEvaluation, SharingMechanism};
use crate::rational::Rational;
use crate::report::{DirectProfile, DirectReport, Histogram};
use crate::scoring::{distribution_from_histogram, expected_score, Distribution};

/// A profile where an agent's own report moves its own share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyProofnessWitness {
    pub profile: DirectProfile,
    pub agent: AgentId,
    pub replacement: DirectReport,
    pub before: Rational,
    pub after: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategyProofness {
    /// Every replacement of every agent's report, in every profile, left that
    /// agent's share unchanged.
    Holds { profiles: u64, replacements: u64 },
    Violated(Box<StrategyProofnessWitness>),
}

impl StrategyProofness {
    pub fn holds(&self) -> bool {
        matches!(self, StrategyProofness::Holds { .. })
    }
}

/// Exhaustive own-report invariance check of the peer-evaluation mechanism.
pub fn check_strategy_proofness_peer_eval(config: &MechanismConfig, cap: SizeCap) -> Result<StrategyProofness> {
    let mech = PeerEvaluation::new(config.clone())?;
    let per_agent = mech.report_space_size();
    let space = ProfileSpace::new(&mech, cap)?;
    cap.check(u128::from(space.len()).saturating_mul(per_agent))?;

    let outcome = (0..space.len())
        .into_par_iter()
        .map(|idx| -> Result<Option<StrategyProofnessWitness>> {
            let profile = space.get(idx);
            let base = mech.shares(&profile)?;
            for agent in config.agents() {
                for replacement in space.agent_space(agent) {
                    if replacement == profile.report(agent) {
                        continue;
                    }
                    let deviated = profile.with_report(replacement.clone());
                    let after = mech.shares(&deviated)?.shares[agent - 1].clone();
                    if after != base.shares[agent - 1] {
                        return Ok(Some(StrategyProofnessWitness {
                            profile: profile.clone(),
                            agent,
                            replacement: replacement.clone(),
                            before: base.shares[agent - 1].clone(),
                            after,
                        }));
                    }
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(witness) = outcome.into_iter().flatten().next() {
        return Ok(StrategyProofness::Violated(Box::new(witness)));
    }
    let replacements = space.len() * config.n as u64 * (per_agent as u64 - 1);
    Ok(StrategyProofness::Holds { profiles: space.len(), replacements })
}

/// Expected-own-share maximizers among all of an agent's reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponse<R> {
    /// Every maximizing report, in report-space order.
    pub reports: Vec<R>,
    pub value: Rational,
    pub evaluated: usize,
}

pub fn best_response_scan<M: ReportSpace>(
    mechanism: &M,
    agent: AgentId,
    belief: &Belief<M::Report>,
    cap: SizeCap,
) -> Result<BestResponse<M::Report>> {
    let size = mechanism.report_space_size();
    cap.check(size.saturating_mul(belief.support().len() as u128))?;
    let space = mechanism.report_space(agent, cap)?;
    let values = space
        .par_iter()
        .map(|report| expected_shares(mechanism, belief, report, agent).map(|s| s[agent - 1].clone()))
        .collect::<Result<Vec<_>>>()?;
    let value = values.iter().max().cloned().ok_or_else(|| Error::InvalidReport("empty report space".into()))?;
    let reports = space
        .into_iter()
        .zip(&values)
        .filter(|(_, v)| **v == value)
        .map(|(r, _)| r)
        .collect();
    Ok(BestResponse { reports, value, evaluated: values.len() })
}

/// Result of comparing expected-score maximizers with Euclidean-nearest
/// feasible forecasts for an event belief `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Properness {
    pub holds: bool,
    /// Histograms maximizing `E_q[R(c/(n−1), ·)]`.
    pub argmax: Vec<Histogram>,
    /// Histograms minimizing `Σ_k (c_k/(n−1) − q_k)²`.
    pub nearest: Vec<Histogram>,
    pub best_expected_score: Rational,
}

pub fn properness_check(config: &MechanismConfig, event_belief: &Distribution, cap: SizeCap) -> Result<Properness> {
    config.validate(MechanismKind::PeerPrediction)?;
    if event_belief.len() != config.bins() {
        return Err(Error::InvalidDistribution(format!(
            "belief has {} outcomes, expected {}",
            event_belief.len(),
            config.bins()
        )));
    }
    let evaluators = (config.n - 1) as u32;
    let hists = feasible_histograms(config, cap)?;
    let mut scored = Vec::with_capacity(hists.len());
    for h in &hists {
        let p = distribution_from_histogram(h, evaluators)?;
        scored.push((expected_score(&p, event_belief)?, p.squared_distance(event_belief)));
    }
    let best = scored.iter().map(|(s, _)| s).max().cloned().unwrap_or_else(Rational::zero);
    let closest = scored.iter().map(|(_, d)| d).min().cloned().unwrap_or_else(Rational::zero);
    let argmax: Vec<Histogram> = hists.iter().zip(&scored).filter(|(_, (s, _))| *s == best).map(|(h, _)| h.clone()).collect();
    let nearest: Vec<Histogram> = hists.iter().zip(&scored).filter(|(_, (_, d))| *d == closest).map(|(h, _)| h.clone()).collect();
    Ok(Properness { holds: argmax == nearest, argmax, nearest, best_expected_score: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::event_belief;
    use crate::mechanisms::PeerPrediction;
    use crate::report::{PredictionReport, Report, StrategyProfile};

    fn q(values: &[(i64, i64)]) -> Distribution {
        Distribution::new(values.iter().map(|&(a, b)| Rational::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn strategy_proofness_small_instances() {
        let r = check_strategy_proofness_peer_eval(&MechanismConfig::peer_evaluation(3, 7, 2), SizeCap::DEFAULT).unwrap();
        assert_eq!(r, StrategyProofness::Holds { profiles: 27, replacements: 27 * 3 * 2 });
        let r = check_strategy_proofness_peer_eval(&MechanismConfig::peer_evaluation(2, 6, 3), SizeCap::DEFAULT).unwrap();
        assert_eq!(r, StrategyProofness::Holds { profiles: 1, replacements: 0 });
        let r = check_strategy_proofness_peer_eval(&MechanismConfig::peer_evaluation(4, 4, 1), SizeCap::DEFAULT).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn strategy_proofness_respects_cap() {
        let cfg = MechanismConfig::peer_evaluation(3, 7, 2);
        assert!(matches!(
            check_strategy_proofness_peer_eval(&cfg, SizeCap(50)),
            Err(Error::SizeLimitExceeded { .. })
        ));
    }

    #[test]
    fn properness_examples() {
        let cfg = MechanismConfig::peer_prediction(3, 12, 2, 1);
        let p = properness_check(&cfg, &q(&[(0, 1), (1, 1), (0, 1)]), SizeCap::DEFAULT).unwrap();
        assert!(p.holds);
        assert_eq!(p.argmax, vec![vec![0, 2, 0]]);
        assert_eq!(p.best_expected_score, Rational::from_integer(2));

        let p = properness_check(&cfg, &q(&[(1, 2), (1, 2), (0, 1)]), SizeCap::DEFAULT).unwrap();
        assert!(p.holds);
        assert_eq!(p.argmax, vec![vec![1, 1, 0]]);

        // a feasible histogram's own distribution is a fixed point
        for h in feasible_histograms(&cfg, SizeCap::DEFAULT).unwrap() {
            let own = distribution_from_histogram(&h, 2).unwrap();
            let p = properness_check(&cfg, &own, SizeCap::DEFAULT).unwrap();
            assert!(p.holds);
            assert!(p.argmax.contains(&h));
        }
    }

    #[test]
    fn peer_evaluation_best_response_is_everything() {
        let cfg = MechanismConfig::peer_evaluation(3, 7, 2);
        let mech = PeerEvaluation::new(cfg.clone()).unwrap();
        let r = |o, v: Vec<u32>| DirectReport::from_values(o, v, &cfg).unwrap();
        let belief = Belief::new(vec![
            (vec![r(2, vec![2, 0]), r(3, vec![1, 1])], Rational::new(1, 3)),
            (vec![r(2, vec![0, 2]), r(3, vec![2, 0])], Rational::new(2, 3)),
        ])
        .unwrap();
        let br = best_response_scan(&mech, 1, &belief, SizeCap::DEFAULT).unwrap();
        assert_eq!(br.reports, mech.report_space(1, SizeCap::DEFAULT).unwrap());
        assert_eq!(br.evaluated, 3);
    }

    #[test]
    fn own_share_is_report_independent_under_any_belief() {
        // brute force over all own reports at n=3, M=2
        let cfg = MechanismConfig::peer_evaluation(3, 7, 2);
        let mech = PeerEvaluation::new(cfg.clone()).unwrap();
        let space = ProfileSpace::new(&mech, SizeCap::DEFAULT).unwrap();
        for idx in (0..space.len()).step_by(4) {
            let profile = space.get(idx);
            let belief = Belief::from_profile(&profile, 2);
            let values: Vec<Rational> = space
                .agent_space(2)
                .iter()
                .map(|own| expected_shares(&mech, &belief, own, 2).unwrap()[1].clone())
                .collect();
            assert!(values.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn prediction_best_response_point_event() {
        for (n, m, k) in [(3usize, 2u32, 1u32), (3, 2, 2), (4, 1, 0)] {
            let mech = PeerPrediction::new(MechanismConfig::peer_prediction(n, 12, m, 1)).unwrap();
            let events = vec![Distribution::point(k as usize, m as usize + 1); n - 1];
            let belief = event_belief(&mech, 1, &events).unwrap();
            let br = best_response_scan(&mech, 1, &belief, SizeCap::DEFAULT).unwrap();
            let mut all_at_k = vec![0u32; m as usize + 1];
            all_at_k[k as usize] = (n - 1) as u32;
            let expected = PredictionReport::uniform(1, all_at_k, mech.config()).unwrap();
            assert_eq!(br.reports, vec![expected]);
        }
    }

    #[test]
    fn prediction_best_response_uniform_event() {
        // n - 1 = 3 divisible by M + 1 = 3
        let mech = PeerPrediction::new(MechanismConfig::peer_prediction(4, 12, 2, 1)).unwrap();
        let uniform = q(&[(1, 3), (1, 3), (1, 3)]);
        let belief = event_belief(&mech, 3, &vec![uniform; 3]).unwrap();
        let br = best_response_scan(&mech, 3, &belief, SizeCap::DEFAULT).unwrap();
        let expected = PredictionReport::uniform(3, vec![1, 1, 1], mech.config()).unwrap();
        assert!(br.reports.contains(&expected));
        assert!(br.reports.iter().all(|r| r.owner() == 3));
    }

    #[test]
    fn best_response_cap() {
        let mech = PeerPrediction::new(MechanismConfig::peer_prediction(4, 12, 2, 1)).unwrap();
        let profile = StrategyProfile::new(
            (1..=4).map(|i| PredictionReport::uniform(i, vec![1, 1, 1], mech.config()).unwrap()).collect(),
            mech.config(),
        )
        .unwrap();
        let belief = Belief::from_profile(&profile, 1);
        assert!(best_response_scan(&mech, 1, &belief, SizeCap(999)).is_err());
        assert!(best_response_scan(&mech, 1, &belief, SizeCap(1000)).is_ok());
    }
}
