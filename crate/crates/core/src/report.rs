//! Reports submitted by agents and the profiles they form.
//!
//! Reports are stored densely: entry `k` of an agent's vector belongs to the
//! `k`-th peer in ascending id order (see [`slot`]). Every constructor
//! validates, so a value of these types always satisfies its invariants for
//! the configuration it was built against.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;

use crate::config::{peers, slot, AgentId, MechanismConfig, MechanismKind};
use crate::error::{Error, Result};

/// Common surface of direct and prediction reports.
pub trait Report: Clone + fmt::Debug + PartialEq + Eq + Hash + Send + Sync + 'static {
    const KIND: MechanismKind;

    fn owner(&self) -> AgentId;

    /// Agent count implied by the report's shape.
    fn agent_count(&self) -> usize;

    /// Re-checks every invariant against `config`.
    fn validate(&self, config: &MechanismConfig) -> Result<()>;
}

/// An agent's direct evaluations of its peers; they sum to the cap `M`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectReport {
    owner: AgentId,
    evaluations: Vec<u32>,
}

impl DirectReport {
    /// Builds a report from evaluations keyed by target id.
    pub fn from_map(
        owner: AgentId,
        evaluations: &BTreeMap<AgentId, u64>,
        config: &MechanismConfig,
    ) -> Result<Self> {
        let dense = densify(owner, evaluations, config.n)?;
        let values = dense
            .into_iter()
            .zip(peers(config.n, owner))
            .map(|(v, target)| {
                u32::try_from(v).map_err(|_| Error::EntryOutOfRange { agent: owner, target, value: v })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(owner, values, config)
    }

    /// Builds a report from evaluations listed in ascending peer order.
    pub fn from_values(owner: AgentId, evaluations: Vec<u32>, config: &MechanismConfig) -> Result<Self> {
        let report = DirectReport { owner, evaluations };
        report.validate(config)?;
        Ok(report)
    }

    pub(crate) fn from_values_unchecked(owner: AgentId, evaluations: Vec<u32>) -> Self {
        DirectReport { owner, evaluations }
    }

    pub fn evaluation(&self, target: AgentId) -> u32 {
        self.evaluations[slot(self.owner, target)]
    }

    pub fn values(&self) -> &[u32] {
        &self.evaluations
    }

    /// `(target, evaluation)` pairs in ascending target order.
    pub fn iter(&self) -> impl Iterator<Item = (AgentId, u32)> + '_ {
        peers(self.agent_count(), self.owner).zip(self.evaluations.iter().copied())
    }
}

impl fmt::Debug for DirectReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DirectReport#{}{:?}", self.owner, self.evaluations)
    }
}

impl Report for DirectReport {
    const KIND: MechanismKind = MechanismKind::PeerEvaluation;

    fn owner(&self) -> AgentId {
        self.owner
    }

    fn agent_count(&self) -> usize {
        self.evaluations.len() + 1
    }

    fn validate(&self, config: &MechanismConfig) -> Result<()> {
        let agent = self.owner;
        if agent == 0 || agent > config.n {
            return Err(Error::AgentMismatch { slot: agent, owner: agent });
        }
        if self.evaluations.len() + 1 != config.n {
            return Err(Error::ConfigMismatch(format!(
                "agent={agent} reports on {} peers, n={}",
                self.evaluations.len(),
                config.n
            )));
        }
        for (target, value) in self.iter() {
            if value > config.cap {
                return Err(Error::EntryOutOfRange { agent, target, value: value.into() });
            }
        }
        let sum: u64 = self.evaluations.iter().map(|&v| u64::from(v)).sum();
        if sum != u64::from(config.cap) {
            return Err(Error::SumMismatch { agent, expected: config.cap.into(), found: sum });
        }
        Ok(())
    }
}

/// Predicted evaluation counts for one target: `counts[k]` agents are
/// expected to give the target evaluation `k`.
pub type Histogram = Vec<u32>;

/// An agent's predicted histograms for each of its peers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredictionReport {
    owner: AgentId,
    histograms: Vec<Histogram>,
}

impl PredictionReport {
    pub fn from_map(
        owner: AgentId,
        histograms: &BTreeMap<AgentId, Vec<u64>>,
        config: &MechanismConfig,
    ) -> Result<Self> {
        let dense = densify(owner, histograms, config.n)?;
        let mut out = Vec::with_capacity(dense.len());
        for (raw, target) in dense.into_iter().zip(peers(config.n, owner)) {
            if raw.len() != config.bins() {
                return Err(Error::HistogramLength {
                    agent: owner,
                    target,
                    expected: config.bins(),
                    found: raw.len(),
                });
            }
            let hist = raw
                .iter()
                .map(|&c| {
                    u32::try_from(c).map_err(|_| Error::EntryOutOfRange { agent: owner, target, value: c })
                })
                .collect::<Result<Histogram>>()?;
            out.push(hist);
        }
        Self::from_histograms(owner, out, config)
    }

    pub fn from_histograms(owner: AgentId, histograms: Vec<Histogram>, config: &MechanismConfig) -> Result<Self> {
        let report = PredictionReport { owner, histograms };
        report.validate(config)?;
        Ok(report)
    }

    /// The same histogram for every peer.
    pub fn uniform(owner: AgentId, histogram: Histogram, config: &MechanismConfig) -> Result<Self> {
        Self::from_histograms(owner, vec![histogram; config.n - 1], config)
    }

    pub(crate) fn from_histograms_unchecked(owner: AgentId, histograms: Vec<Histogram>) -> Self {
        PredictionReport { owner, histograms }
    }

    pub fn histogram(&self, target: AgentId) -> &[u32] {
        &self.histograms[slot(self.owner, target)]
    }

    pub fn histograms(&self) -> &[Histogram] {
        &self.histograms
    }

    /// Replaces the histogram for `target`, keeping the rest.
    pub(crate) fn with_histogram(&self, target: AgentId, histogram: Histogram) -> Self {
        let mut histograms = self.histograms.clone();
        histograms[slot(self.owner, target)] = histogram;
        PredictionReport { owner: self.owner, histograms }
    }

    pub fn iter(&self) -> impl Iterator<Item = (AgentId, &[u32])> + '_ {
        peers(self.agent_count(), self.owner).zip(self.histograms.iter().map(Vec::as_slice))
    }
}

impl fmt::Debug for PredictionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PredictionReport#{}{:?}", self.owner, self.histograms)
    }
}

impl Report for PredictionReport {
    const KIND: MechanismKind = MechanismKind::PeerPrediction;

    fn owner(&self) -> AgentId {
        self.owner
    }

    fn agent_count(&self) -> usize {
        self.histograms.len() + 1
    }

    fn validate(&self, config: &MechanismConfig) -> Result<()> {
        let agent = self.owner;
        if agent == 0 || agent > config.n {
            return Err(Error::AgentMismatch { slot: agent, owner: agent });
        }
        if self.histograms.len() + 1 != config.n {
            return Err(Error::ConfigMismatch(format!(
                "agent={agent} reports on {} peers, n={}",
                self.histograms.len(),
                config.n
            )));
        }
        let evaluators = (config.n - 1) as u64;
        for (target, hist) in self.iter() {
            if hist.len() != config.bins() {
                return Err(Error::HistogramLength {
                    agent,
                    target,
                    expected: config.bins(),
                    found: hist.len(),
                });
            }
            for &c in hist {
                let c = u64::from(c);
                if c > evaluators || (config.strict_counts && c == 0) {
                    return Err(Error::EntryOutOfRange { agent, target, value: c });
                }
            }
            let sum: u64 = hist.iter().map(|&c| u64::from(c)).sum();
            if sum != evaluators {
                return Err(Error::SumMismatch { agent, expected: evaluators, found: sum });
            }
        }
        Ok(())
    }
}

/// Orders map entries by peer, rejecting self, unknown and missing targets.
fn densify<T: Clone>(owner: AgentId, entries: &BTreeMap<AgentId, T>, n: usize) -> Result<Vec<T>> {
    if entries.contains_key(&owner) {
        return Err(Error::SelfEvaluationPresent { agent: owner });
    }
    if let Some(&unknown) = entries.keys().find(|&&t| t == 0 || t > n) {
        return Err(Error::UnknownTarget { agent: owner, target: unknown.to_string() });
    }
    peers(n, owner)
        .map(|target| {
            entries
                .get(&target)
                .cloned()
                .ok_or(Error::MissingTarget { agent: owner, target })
        })
        .collect()
}

/// A full strategy profile `X = (x_1, ..., x_n)`; `reports[i - 1]` belongs to agent `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyProfile<R> {
    reports: Vec<R>,
}

pub type DirectProfile = StrategyProfile<DirectReport>;
pub type PredictionProfile = StrategyProfile<PredictionReport>;

impl<R: Report> StrategyProfile<R> {
    pub fn new(reports: Vec<R>, config: &MechanismConfig) -> Result<Self> {
        let profile = StrategyProfile { reports };
        profile.validate(config)?;
        Ok(profile)
    }

    pub(crate) fn from_reports_unchecked(reports: Vec<R>) -> Self {
        StrategyProfile { reports }
    }

    /// Inserts agent `own.owner()`'s report into an opponents' profile `X_{-i}`.
    pub fn assemble(own: R, opponents: &[R]) -> Result<Self> {
        let agent = own.owner();
        let n = opponents.len() + 1;
        if agent == 0 || agent > n || own.agent_count() != n {
            return Err(Error::InvalidReport(format!(
                "agent={agent} cannot join an opponents' profile of {} reports",
                opponents.len()
            )));
        }
        let mut reports = Vec::with_capacity(n);
        reports.extend_from_slice(&opponents[..agent - 1]);
        reports.push(own);
        reports.extend_from_slice(&opponents[agent - 1..]);
        for (idx, r) in reports.iter().enumerate() {
            if r.owner() != idx + 1 || r.agent_count() != n {
                return Err(Error::InvalidBelief(format!(
                    "opponents' profile has report of agent {} in slot {}",
                    r.owner(),
                    idx + 1
                )));
            }
        }
        Ok(StrategyProfile { reports })
    }

    pub fn validate(&self, config: &MechanismConfig) -> Result<()> {
        if self.reports.len() != config.n {
            return Err(Error::ReportCount { expected: config.n, found: self.reports.len() });
        }
        for (idx, report) in self.reports.iter().enumerate() {
            if report.owner() != idx + 1 {
                return Err(Error::AgentMismatch { slot: idx + 1, owner: report.owner() });
            }
            report.validate(config)?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.reports.len()
    }

    pub fn reports(&self) -> &[R] {
        &self.reports
    }

    pub fn report(&self, agent: AgentId) -> &R {
        &self.reports[agent - 1]
    }

    /// `X_{-i}`: every report except agent `i`'s, in id order.
    pub fn opponents(&self, agent: AgentId) -> Vec<R> {
        self.reports
            .iter()
            .filter(|r| r.owner() != agent)
            .cloned()
            .collect()
    }

    /// `(x̂_i, X_{-i})`: this profile with one report substituted.
    pub fn with_report(&self, report: R) -> Self {
        assert_eq!(report.agent_count(), self.n(), "report shaped for a different agent count");
        let mut reports = self.reports.clone();
        let idx = report.owner() - 1;
        reports[idx] = report;
        StrategyProfile { reports }
    }
}

/// A profile of either kind, as read from an input document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Profile {
    Direct(DirectProfile),
    Prediction(PredictionProfile),
}

impl Profile {
    pub fn kind(&self) -> MechanismKind {
        match self {
            Profile::Direct(_) => MechanismKind::PeerEvaluation,
            Profile::Prediction(_) => MechanismKind::PeerPrediction,
        }
    }
}

pub fn validate_profile(profile: &Profile, config: &MechanismConfig) -> Result<()> {
    match profile {
        Profile::Direct(p) => p.validate(config),
        Profile::Prediction(p) => p.validate(config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_map(pairs: &[(AgentId, u64)]) -> BTreeMap<AgentId, u64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn direct_report_accepts_sum_to_cap() {
        let cfg = MechanismConfig::peer_evaluation(3, 9, 3);
        let r = DirectReport::from_map(1, &direct_map(&[(2, 2), (3, 1)]), &cfg).unwrap();
        assert_eq!(r.evaluation(2), 2);
        assert_eq!(r.evaluation(3), 1);
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![(2, 2), (3, 1)]);
    }

    #[test]
    fn direct_report_rejects_wrong_sum() {
        let cfg = MechanismConfig::peer_evaluation(3, 9, 3);
        let err = DirectReport::from_map(1, &direct_map(&[(2, 2), (3, 2)]), &cfg).unwrap_err();
        assert_eq!(err, Error::SumMismatch { agent: 1, expected: 3, found: 4 });
        assert_eq!(err.to_string(), "SumMismatch agent=1 expected=3 found=4");
    }

    #[test]
    fn direct_report_structural_errors() {
        let cfg = MechanismConfig::peer_evaluation(3, 9, 3);
        assert_eq!(
            DirectReport::from_map(2, &direct_map(&[(1, 1), (2, 1), (3, 1)]), &cfg).unwrap_err(),
            Error::SelfEvaluationPresent { agent: 2 }
        );
        assert_eq!(
            DirectReport::from_map(2, &direct_map(&[(1, 3)]), &cfg).unwrap_err(),
            Error::MissingTarget { agent: 2, target: 3 }
        );
        assert_eq!(
            DirectReport::from_map(2, &direct_map(&[(1, 4), (3, 0)]), &cfg).unwrap_err(),
            Error::EntryOutOfRange { agent: 2, target: 1, value: 4 }
        );
        assert!(matches!(
            DirectReport::from_map(2, &direct_map(&[(1, 1), (3, 1), (7, 1)]), &cfg).unwrap_err(),
            Error::UnknownTarget { agent: 2, .. }
        ));
    }

    #[test]
    fn histogram_must_count_every_evaluator() {
        let cfg = MechanismConfig::peer_prediction(3, 9, 1, 1);
        let mut map = BTreeMap::new();
        map.insert(2, vec![1, 2]);
        map.insert(3, vec![1, 1]);
        assert_eq!(
            PredictionReport::from_map(1, &map, &cfg).unwrap_err(),
            Error::SumMismatch { agent: 1, expected: 2, found: 3 }
        );
    }

    #[test]
    fn histogram_shape_and_range() {
        let cfg = MechanismConfig::peer_prediction(3, 9, 2, 1);
        assert!(matches!(
            PredictionReport::from_histograms(1, vec![vec![0, 2], vec![0, 2, 0]], &cfg),
            Err(Error::HistogramLength { agent: 1, target: 2, expected: 3, found: 2 })
        ));
        assert!(matches!(
            PredictionReport::from_histograms(1, vec![vec![0, 3, 0], vec![0, 2, 0]], &cfg),
            Err(Error::EntryOutOfRange { agent: 1, target: 2, value: 3 })
        ));
        assert!(PredictionReport::from_histograms(1, vec![vec![0, 2, 0], vec![1, 0, 1]], &cfg).is_ok());
    }

    #[test]
    fn strict_mode_forbids_empty_bins() {
        let cfg = MechanismConfig::peer_prediction(4, 9, 2, 1).with_strict_counts(true);
        assert!(PredictionReport::uniform(1, vec![1, 1, 1], &cfg).is_ok());
        assert_eq!(
            PredictionReport::uniform(1, vec![0, 2, 1], &cfg).unwrap_err(),
            Error::EntryOutOfRange { agent: 1, target: 2, value: 0 }
        );
    }

    #[test]
    fn profile_substitution_and_assembly() {
        let cfg = MechanismConfig::peer_evaluation(3, 6, 2);
        let r = |o, v: Vec<u32>| DirectReport::from_values(o, v, &cfg).unwrap();
        let profile = StrategyProfile::new(vec![r(1, vec![1, 1]), r(2, vec![2, 0]), r(3, vec![0, 2])], &cfg).unwrap();
        let opp = profile.opponents(2);
        assert_eq!(opp.len(), 2);
        let rebuilt = StrategyProfile::assemble(profile.report(2).clone(), &opp).unwrap();
        assert_eq!(rebuilt, profile);
        let deviated = profile.with_report(r(1, vec![2, 0]));
        assert_eq!(deviated.report(1).values(), &[2, 0]);
        assert_eq!(deviated.report(2), profile.report(2));
    }

    #[test]
    fn profile_requires_every_agent_once() {
        let cfg = MechanismConfig::peer_evaluation(3, 6, 2);
        let r = |o, v: Vec<u32>| DirectReport::from_values(o, v, &cfg).unwrap();
        assert_eq!(
            StrategyProfile::new(vec![r(1, vec![1, 1]), r(2, vec![1, 1])], &cfg).unwrap_err(),
            Error::ReportCount { expected: 3, found: 2 }
        );
        assert_eq!(
            StrategyProfile::new(vec![r(1, vec![1, 1]), r(3, vec![1, 1]), r(2, vec![1, 1])], &cfg).unwrap_err(),
            Error::AgentMismatch { slot: 2, owner: 3 }
        );
    }
}
