//! Exhaustive verification of the mechanisms' incentive properties at small
//! scale: report enumeration, expected shares under beliefs, best responses,
//! strategy-proofness and collusion scans.

mod belief;
mod collusion;
mod enumerate;
mod strategy;

pub use belief::{belief_consistent_baseline, event_belief, event_histogram, expected_shares, Belief};
pub use collusion::{
    collusion_candidates, collusion_scan, default_truthful_predictions, threshold_check, CollusionBaseline,
    CollusionOpportunity, PairFilter, Resistance, ThresholdRow,
};
pub use enumerate::{
    binomial, compositions, enumerate_direct_reports, enumerate_prediction_reports, feasible_histograms,
    ProfileSpace, ReportSpace,
};
pub use strategy::{
    best_response_scan, check_strategy_proofness_peer_eval, properness_check, BestResponse, Properness,
    StrategyProofness, StrategyProofnessWitness,
};

use crate::error::{Error, Result};

/// Environment variable overriding the default enumeration cap.
pub const SIZE_CAP_ENV: &str = "PEERSHARE_SIZE_CAP";

/// Upper bound on enumerated (report × profile) pairs for one scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeCap(pub u64);

impl SizeCap {
    pub const DEFAULT: SizeCap = SizeCap(10_000_000);

    /// The default cap unless `PEERSHARE_SIZE_CAP` holds a positive integer.
    pub fn from_env() -> Result<Self> {
        match std::env::var(SIZE_CAP_ENV) {
            Ok(raw) => raw
                .trim()
                .parse::<u64>()
                .ok()
                .filter(|&v| v > 0)
                .map(SizeCap)
                .ok_or_else(|| Error::Parse(format!("{SIZE_CAP_ENV}={raw:?} is not a positive integer"))),
            Err(_) => Ok(Self::DEFAULT),
        }
    }

    pub(crate) fn check(self, requested: u128) -> Result<()> {
        if requested > u128::from(self.0) {
            Err(Error::SizeLimitExceeded { requested: requested.to_string(), cap: self.0 })
        } else {
            Ok(())
        }
    }
}

impl Default for SizeCap {
    fn default() -> Self {
        Self::DEFAULT
    }
}
