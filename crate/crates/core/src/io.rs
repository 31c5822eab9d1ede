//! JSON report documents and experiment spec files.
//!
//! A report document looks like
//!
//! ```json
//! {
//!   "mechanism": "peer-evaluation",
//!   "config": { "n": 3, "V": "9", "M": 3 },
//!   "reports": [ { "2": 2, "3": 1 }, { "1": 3, "3": 0 }, { "1": 1, "2": 2 } ]
//! }
//! ```
//!
//! `reports[i]` belongs to agent `i + 1` and is keyed by target id. Peer
//! prediction entries are histograms (`"2": [0, 2, 0]`). `V` and `alpha` may be
//! integers or strings holding an integer, decimal or `p/q`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{validate_config, AgentId, MechanismConfig, MechanismKind};
use crate::error::{Error, Result};
use crate::report::{DirectReport, PredictionReport, Profile, StrategyProfile};
use crate::sim::ExperimentSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Count(u64),
    Histogram(Vec<u64>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    mechanism: MechanismKind,
    config: MechanismConfig,
    reports: Vec<BTreeMap<String, RawEntry>>,
}

/// A parsed and validated report document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareDocument {
    pub mechanism: MechanismKind,
    pub config: MechanismConfig,
    pub profile: Profile,
}

fn target_keys<T: Clone>(
    owner: AgentId,
    raw: &BTreeMap<String, RawEntry>,
    mut pick: impl FnMut(&RawEntry) -> Option<T>,
    expected: &'static str,
) -> Result<BTreeMap<AgentId, T>> {
    let mut out = BTreeMap::new();
    for (key, entry) in raw {
        let target = key
            .trim()
            .parse::<AgentId>()
            .map_err(|_| Error::UnknownTarget { agent: owner, target: key.clone() })?;
        let value = pick(entry).ok_or(Error::ReportKindMismatch { agent: owner, expected })?;
        if out.insert(target, value).is_some() {
            return Err(Error::UnknownTarget { agent: owner, target: key.clone() });
        }
    }
    Ok(out)
}

pub fn parse_document(text: &str) -> Result<ShareDocument> {
    let raw: RawDocument = serde_json::from_str(text)?;
    validate_config(&raw.config, raw.mechanism)?;
    let config = raw.config;
    if raw.reports.len() != config.n {
        return Err(Error::ReportCount { expected: config.n, found: raw.reports.len() });
    }
    let profile = match raw.mechanism {
        MechanismKind::PeerEvaluation => {
            let reports = raw
                .reports
                .iter()
                .enumerate()
                .map(|(idx, entries)| {
                    let owner = idx + 1;
                    let map = target_keys(
                        owner,
                        entries,
                        |e| match e {
                            RawEntry::Count(c) => Some(*c),
                            RawEntry::Histogram(_) => None,
                        },
                        "evaluation count",
                    )?;
                    DirectReport::from_map(owner, &map, &config)
                })
                .collect::<Result<Vec<_>>>()?;
            Profile::Direct(StrategyProfile::new(reports, &config)?)
        }
        MechanismKind::PeerPrediction => {
            let reports = raw
                .reports
                .iter()
                .enumerate()
                .map(|(idx, entries)| {
                    let owner = idx + 1;
                    let map = target_keys(
                        owner,
                        entries,
                        |e| match e {
                            RawEntry::Histogram(h) => Some(h.clone()),
                            RawEntry::Count(_) => None,
                        },
                        "histogram",
                    )?;
                    PredictionReport::from_map(owner, &map, &config)
                })
                .collect::<Result<Vec<_>>>()?;
            Profile::Prediction(StrategyProfile::new(reports, &config)?)
        }
    };
    Ok(ShareDocument { mechanism: raw.mechanism, config, profile })
}

pub fn load_document(path: impl AsRef<Path>) -> Result<ShareDocument> {
    parse_document(&fs::read_to_string(path)?)
}

impl ShareDocument {
    pub fn new(config: MechanismConfig, profile: Profile) -> Result<Self> {
        let mechanism = profile.kind();
        validate_config(&config, mechanism)?;
        crate::report::validate_profile(&profile, &config)?;
        Ok(ShareDocument { mechanism, config, profile })
    }

    /// Pretty-printed JSON that [`parse_document`] reads back unchanged.
    pub fn to_json(&self) -> Result<String> {
        let reports = match &self.profile {
            Profile::Direct(p) => p
                .reports()
                .iter()
                .map(|r| r.iter().map(|(t, v)| (t.to_string(), RawEntry::Count(v.into()))).collect())
                .collect(),
            Profile::Prediction(p) => p
                .reports()
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|(t, h)| (t.to_string(), RawEntry::Histogram(h.iter().map(|&c| c.into()).collect())))
                        .collect()
                })
                .collect(),
        };
        let raw = RawDocument { mechanism: self.mechanism, config: self.config.clone(), reports };
        Ok(serde_json::to_string_pretty(&raw)?)
    }
}

pub fn parse_experiment_spec(text: &str) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_experiment_spec(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
    parse_experiment_spec(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    const ALG1: &str = r#"{
        "mechanism": "peer-evaluation",
        "config": {"n": 3, "V": "9", "M": 3},
        "reports": [{"2": 2, "3": 1}, {"1": 3, "3": 0}, {"1": 1, "2": 2}]
    }"#;

    #[test]
    fn parses_direct_document() {
        let doc = parse_document(ALG1).unwrap();
        assert_eq!(doc.config.reward, Rational::from(9));
        match &doc.profile {
            Profile::Direct(p) => assert_eq!(p.report(2).values(), &[3, 0]),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn parses_prediction_document_with_fraction_alpha() {
        let text = r#"{
            "mechanism": "peer-prediction",
            "config": {"n": 3, "V": "12", "M": 2, "alpha": "5/2"},
            "reports": [{"2": [0,2,0], "3": [0,2,0]}, {"1": [0,2,0], "3": [1,0,1]}, {"1": [0,2,0], "2": [0,2,0]}]
        }"#;
        let doc = parse_document(text).unwrap();
        assert_eq!(doc.config.alpha, Some(Rational::new(5, 2)));
        let again = parse_document(&doc.to_json().unwrap()).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn error_cases() {
        let sum = ALG1.replace(r#"{"2": 2, "3": 1}"#, r#"{"2": 2, "3": 2}"#);
        assert_eq!(
            parse_document(&sum).unwrap_err(),
            Error::SumMismatch { agent: 1, expected: 3, found: 4 }
        );
        let own = ALG1.replace(r#"{"2": 2, "3": 1}"#, r#"{"1": 0, "2": 2, "3": 1}"#);
        assert_eq!(parse_document(&own).unwrap_err(), Error::SelfEvaluationPresent { agent: 1 });
        let key = ALG1.replace(r#"{"2": 2, "3": 1}"#, r#"{"two": 2, "3": 1}"#);
        assert!(matches!(parse_document(&key).unwrap_err(), Error::UnknownTarget { agent: 1, .. }));
        let kind = ALG1.replace(r#"{"2": 2, "3": 1}"#, r#"{"2": [2], "3": 1}"#);
        assert!(matches!(parse_document(&kind).unwrap_err(), Error::ReportKindMismatch { agent: 1, .. }));
        let cap = ALG1.replace(r#""M": 3"#, r#""M": 10"#);
        assert!(matches!(parse_document(&cap).unwrap_err(), Error::CapOutOfRange { .. }));
        let short = ALG1.replace(r#", {"1": 1, "2": 2}]"#, "]");
        assert_eq!(parse_document(&short).unwrap_err(), Error::ReportCount { expected: 3, found: 2 });
        assert!(matches!(parse_document("{").unwrap_err(), Error::Parse(_)));
        let float = ALG1.replace(r#""V": "9""#, r#""V": 9.5"#);
        assert!(parse_document(&float).is_err());
    }

    #[test]
    fn experiment_spec_round_trip() {
        let text = r#"{
            "mechanism": "peer-evaluation",
            "config": {"n": 3, "V": 6, "M": 2},
            "world": {"quality_weights": ["1", "2", "3/2"], "noise_mode": "sampled", "seed": 4},
            "policies": [{"kind": "truthful"}, {"kind": "colluder-pair", "partner": 3}, {"kind": "uniform-random"}],
            "runs": 5
        }"#;
        let spec = parse_experiment_spec(text).unwrap();
        assert_eq!(spec.world.quality_weights[2], Rational::new(3, 2));
        let bad = text.replace(r#""partner": 3"#, r#""partner": 2"#);
        assert!(matches!(parse_experiment_spec(&bad), Err(Error::InvalidSpec(_))));
    }
}
