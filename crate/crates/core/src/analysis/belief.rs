use crate::analysis::{feasible_histograms, SizeCap};
use crate::config::{peers, slot, AgentId};
use crate::error::{Error, Result};
use crate::mechanisms::{PeerPrediction, SharingMechanism};
use crate::rational::Rational;
use crate::report::{Histogram, PredictionProfile, PredictionReport, Report, StrategyProfile};
use crate::scoring::{distribution_from_histogram, nint, Distribution};

/// Finite-support belief over the opponents' reports `X_{-i}`.
///
/// Each support entry lists the other agents' reports in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Belief<R> {
    support: Vec<(Vec<R>, Rational)>,
}

impl<R: Report> Belief<R> {
    pub fn new(support: Vec<(Vec<R>, Rational)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidBelief("empty support".into()));
        }
        if let Some((_, p)) = support.iter().find(|(_, p)| !p.is_positive()) {
            return Err(Error::InvalidBelief(format!("non-positive probability {p}")));
        }
        let total: Rational = support.iter().map(|(_, p)| p).sum();
        if total != Rational::one() {
            return Err(Error::InvalidBelief(format!("probabilities sum to {total}")));
        }
        let width = support[0].0.len();
        if support.iter().any(|(opp, _)| opp.len() != width) {
            return Err(Error::InvalidBelief("support profiles differ in size".into()));
        }
        Ok(Belief { support })
    }

    /// Certainty about the opponents' reports.
    pub fn point(opponents: Vec<R>) -> Self {
        Belief { support: vec![(opponents, Rational::one())] }
    }

    /// Point belief on the opponents of `agent` in `profile`.
    pub fn from_profile(profile: &StrategyProfile<R>, agent: AgentId) -> Self {
        Self::point(profile.opponents(agent))
    }

    /// Probability-weighted mixture of beliefs; weights must sum to one.
    pub fn mixture(components: &[(Belief<R>, Rational)]) -> Result<Self> {
        let support = components
            .iter()
            .flat_map(|(b, w)| b.support.iter().map(move |(opp, p)| (opp.clone(), p * w)))
            .collect();
        Belief::new(support)
    }

    pub fn support(&self) -> &[(Vec<R>, Rational)] {
        &self.support
    }
}

/// `E[Γ(x_i, X_{-i})]` over the belief, for every agent.
pub fn expected_shares<M: SharingMechanism>(
    mechanism: &M,
    belief: &Belief<M::Report>,
    own_report: &M::Report,
    agent: AgentId,
) -> Result<Vec<Rational>> {
    let config = mechanism.config();
    if own_report.owner() != agent {
        return Err(Error::InvalidReport(format!(
            "report belongs to agent {}, expected {agent}",
            own_report.owner()
        )));
    }
    own_report
        .validate(config)
        .map_err(|e| Error::InvalidReport(e.to_string()))?;

    let mut expected = vec![Rational::zero(); config.n];
    for (opponents, prob) in belief.support() {
        if opponents.len() + 1 != config.n {
            return Err(Error::InvalidBelief(format!(
                "support profile has {} reports, expected {}",
                opponents.len(),
                config.n - 1
            )));
        }
        let profile = StrategyProfile::assemble(own_report.clone(), opponents)
            .map_err(|e| Error::InvalidBelief(e.to_string()))?;
        let result = mechanism
            .shares(&profile)
            .map_err(|e| Error::InvalidBelief(e.to_string()))?;
        for (acc, share) in expected.iter_mut().zip(&result.shares) {
            *acc += prob * share;
        }
    }
    Ok(expected)
}

/// A valid histogram whose mean rounds to `event`. Without strict counts this
/// is the point mass on `event`; otherwise the feasible histogram with mean
/// closest to `event` (first in lexicographic order on ties).
pub fn event_histogram(mechanism: &PeerPrediction, target: AgentId, event: u32) -> Result<Histogram> {
    let cfg = mechanism.config();
    let evaluators = (cfg.n - 1) as u32;
    if event > cfg.cap {
        return Err(Error::BeliefConstructionInfeasible { target, event });
    }
    if !cfg.strict_counts {
        let mut h = vec![0; cfg.bins()];
        h[event as usize] = evaluators;
        return Ok(h);
    }
    let goal = Rational::from(event);
    let mut best: Option<(Rational, Histogram)> = None;
    for h in feasible_histograms(cfg, SizeCap::DEFAULT)? {
        let mean = distribution_from_histogram(&h, evaluators)?.mean();
        if nint(&mean) != event.into() {
            continue;
        }
        let gap = (&mean - &goal).abs();
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, h));
        }
    }
    best.map(|(_, h)| h)
        .ok_or(Error::BeliefConstructionInfeasible { target, event })
}

/// Belief for `agent` under which the scored event of its prediction about
/// each peer `j` is distributed as `events[j]` (peers in ascending order).
///
/// Every opponent gives the same event-hitting histogram for `j`, so the
/// temporary grade of `j` is that histogram's mean. Marginals are coupled by
/// cumulative probability, which keeps the support within `Σ_j |events[j]|`
/// profiles.
pub fn event_belief(
    mechanism: &PeerPrediction,
    agent: AgentId,
    events: &[Distribution],
) -> Result<Belief<PredictionReport>> {
    let cfg = mechanism.config();
    let n = cfg.n;
    if agent == 0 || agent > n {
        return Err(Error::InvalidBelief(format!("no agent {agent}")));
    }
    if events.len() != n - 1 || events.iter().any(|d| d.len() != cfg.bins()) {
        return Err(Error::InvalidBelief(format!(
            "need {} event distributions over {} outcomes",
            n - 1,
            cfg.bins()
        )));
    }

    // cumulative breakpoints across all targets
    let mut cuts: Vec<Rational> = vec![Rational::zero()];
    for dist in events {
        let mut acc = Rational::zero();
        for p in dist.probabilities() {
            acc += p;
            cuts.push(acc.clone());
        }
    }
    cuts.sort();
    cuts.dedup();

    // predictions about the agent itself only feed its grade, which no
    // deviation of the agent can move
    let filler = match event_histogram(mechanism, agent, cfg.cap / 2) {
        Ok(h) => h,
        Err(_) => feasible_histograms(cfg, SizeCap::DEFAULT)?
            .into_iter()
            .next()
            .ok_or(Error::BeliefConstructionInfeasible { target: agent, event: cfg.cap / 2 })?,
    };
    let mut hist_cache: Vec<Option<Histogram>> = vec![None; cfg.bins()];

    let mut support = Vec::new();
    for window in cuts.windows(2) {
        let (lo, hi) = (&window[0], &window[1]);
        let width = hi - lo;
        if !width.is_positive() {
            continue;
        }
        // the event each target takes on the probability interval (lo, hi]
        let mut chosen = Vec::with_capacity(n - 1);
        for (dist, target) in events.iter().zip(peers(n, agent)) {
            let mut acc = Rational::zero();
            let mut pick = None;
            for (k, p) in dist.probabilities().iter().enumerate() {
                acc += p;
                if *hi <= acc && p.is_positive() {
                    pick = Some(k as u32);
                    break;
                }
            }
            let event = pick.expect("cumulative probabilities reach one");
            let idx = event as usize;
            if hist_cache[idx].is_none() {
                hist_cache[idx] = Some(event_histogram(mechanism, target, event)?);
            }
            chosen.push(hist_cache[idx].clone().unwrap());
        }

        let opponents = peers(n, agent)
            .map(|l| {
                let histograms = peers(n, l)
                    .map(|t| if t == agent { filler.clone() } else { chosen[slot(agent, t)].clone() })
                    .collect();
                PredictionReport::from_histograms(l, histograms, cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        support.push((opponents, width));
    }
    Belief::new(support)
}

/// Belief for `agent` whose scored events follow its own truthful predictions
/// `x*_i^j / (n − 1)`.
pub fn belief_consistent_baseline(
    mechanism: &PeerPrediction,
    truthful: &PredictionProfile,
    agent: AgentId,
) -> Result<Belief<PredictionReport>> {
    let evaluators = (mechanism.config().n - 1) as u32;
    let events = truthful
        .report(agent)
        .histograms()
        .iter()
        .map(|h| distribution_from_histogram(h, evaluators))
        .collect::<Result<Vec<_>>>()?;
    event_belief(mechanism, agent, &events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MechanismConfig;
    use crate::mechanisms::PeerEvaluation;
    use crate::report::DirectReport;

    fn prediction_mech(n: usize, m: u32) -> PeerPrediction {
        PeerPrediction::new(MechanismConfig::peer_prediction(n, 12, m, 1)).unwrap()
    }

    /// Probability that `agent`'s prediction about `target` is scored against `event`.
    fn event_probability(mech: &PeerPrediction, belief: &Belief<PredictionReport>, agent: AgentId, target: AgentId, event: u32) -> Rational {
        let own = PredictionReport::uniform(agent, {
            let mut h = vec![0; mech.config().bins()];
            h[0] = (mech.config().n - 1) as u32;
            h
        }, mech.config())
        .unwrap();
        belief
            .support()
            .iter()
            .filter(|(opp, _)| {
                let p = StrategyProfile::assemble(own.clone(), opp).unwrap();
                mech.shares(&p).unwrap().scored_event(agent, target) == event
            })
            .map(|(_, p)| p.clone())
            .sum()
    }

    #[test]
    fn belief_validation() {
        let cfg = MechanismConfig::peer_evaluation(3, 6, 2);
        let r = |o, v: Vec<u32>| DirectReport::from_values(o, v, &cfg).unwrap();
        let opp = vec![r(2, vec![1, 1]), r(3, vec![1, 1])];
        assert!(Belief::new(vec![(opp.clone(), Rational::new(1, 2))]).is_err());
        assert!(Belief::new(vec![(opp.clone(), Rational::zero()), (opp.clone(), Rational::one())]).is_err());
        assert!(Belief::<DirectReport>::new(vec![]).is_err());
        assert!(Belief::new(vec![(opp, Rational::one())]).is_ok());
    }

    #[test]
    fn point_belief_equals_realized_shares() {
        let cfg = MechanismConfig::peer_evaluation(3, 6, 2);
        let mech = PeerEvaluation::new(cfg.clone()).unwrap();
        let r = |o, v: Vec<u32>| DirectReport::from_values(o, v, &cfg).unwrap();
        let profile = StrategyProfile::new(vec![r(1, vec![2, 0]), r(2, vec![1, 1]), r(3, vec![0, 2])], &cfg).unwrap();
        let belief = Belief::from_profile(&profile, 1);
        let expected = expected_shares(&mech, &belief, profile.report(1), 1).unwrap();
        assert_eq!(expected, mech.shares(&profile).unwrap().shares);
    }

    #[test]
    fn two_point_belief_averages() {
        let cfg = MechanismConfig::peer_evaluation(3, 6, 2);
        let mech = PeerEvaluation::new(cfg.clone()).unwrap();
        let r = |o, v: Vec<u32>| DirectReport::from_values(o, v, &cfg).unwrap();
        let a = vec![r(2, vec![2, 0]), r(3, vec![2, 0])];
        let b = vec![r(2, vec![0, 2]), r(3, vec![0, 2])];
        let half = Rational::new(1, 2);
        let belief = Belief::new(vec![(a.clone(), half.clone()), (b.clone(), half.clone())]).unwrap();
        let own = r(1, vec![1, 1]);
        let mean = expected_shares(&mech, &belief, &own, 1).unwrap();
        let sa = expected_shares(&mech, &Belief::point(a), &own, 1).unwrap();
        let sb = expected_shares(&mech, &Belief::point(b), &own, 1).unwrap();
        for k in 0..3 {
            assert_eq!(mean[k], (&sa[k] + &sb[k]) * &half);
        }
    }

    #[test]
    fn own_report_must_match_agent() {
        let cfg = MechanismConfig::peer_evaluation(3, 6, 2);
        let mech = PeerEvaluation::new(cfg.clone()).unwrap();
        let r = |o, v: Vec<u32>| DirectReport::from_values(o, v, &cfg).unwrap();
        let belief = Belief::point(vec![r(2, vec![1, 1]), r(3, vec![1, 1])]);
        assert!(matches!(expected_shares(&mech, &belief, &r(2, vec![1, 1]), 1), Err(Error::InvalidReport(_))));
        // support laid out for agent 1 cannot host agent 2's report
        assert!(matches!(expected_shares(&mech, &belief, &r(2, vec![1, 1]), 2), Err(Error::InvalidBelief(_))));
    }

    #[test]
    fn event_belief_hits_requested_marginals() {
        for (n, m) in [(3usize, 2u32), (4, 2), (5, 1)] {
            let mech = prediction_mech(n, m);
            let bins = m as usize + 1;
            let events: Vec<Distribution> = (0..n - 1)
                .map(|t| {
                    let weights: Vec<u32> = (0..bins).map(|k| ((k + t) % bins) as u32 + 1).collect();
                    let total: u32 = weights.iter().sum();
                    distribution_from_histogram(&weights, total).unwrap()
                })
                .collect();
            let agent = 2;
            let belief = event_belief(&mech, agent, &events).unwrap();
            for (target, dist) in peers(n, agent).zip(&events) {
                for (k, q) in dist.probabilities().iter().enumerate() {
                    assert_eq!(&event_probability(&mech, &belief, agent, target, k as u32), q, "n={n} target={target} k={k}");
                }
            }
        }
    }

    #[test]
    fn strict_mode_construction_can_fail() {
        // n=4, M=2 strict: the only histogram is (1,1,1), mean 1
        let cfg = MechanismConfig::peer_prediction(4, 12, 2, 1).with_strict_counts(true);
        let mech = PeerPrediction::new(cfg).unwrap();
        assert_eq!(event_histogram(&mech, 3, 1).unwrap(), vec![1, 1, 1]);
        assert_eq!(
            event_histogram(&mech, 3, 0).unwrap_err(),
            Error::BeliefConstructionInfeasible { target: 3, event: 0 }
        );
    }
}
