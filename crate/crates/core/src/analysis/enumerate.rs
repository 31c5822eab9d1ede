use crate::analysis::SizeCap;
use crate::config::{AgentId, MechanismConfig};
use crate::error::{Error, Result};
use crate::mechanisms::{PeerEvaluation, PeerPrediction, SharingMechanism};
use crate::report::{DirectReport, Histogram, PredictionReport, Report, StrategyProfile};

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = match acc.checked_mul(u128::from(n - i)) {
            Some(v) => v / u128::from(i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All ordered tuples of `parts` nonnegative integers summing to `total`, in
/// ascending lexicographic order.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn fill(remaining: u32, parts_left: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts_left == 1 {
            current.push(remaining);
            out.push(current.clone());
            current.pop();
            return;
        }
        for first in 0..=remaining {
            current.push(first);
            fill(remaining - first, parts_left - 1, current, out);
            current.pop();
        }
    }

    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    fill(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Every direct evaluation vector for `n` agents and cap `m`:
/// `C(m + n − 2, n − 2)` compositions of `m` into `n − 1` parts.
pub fn enumerate_direct_reports(n: usize, m: u32, cap: SizeCap) -> Result<Vec<Vec<u32>>> {
    if n < 2 {
        return Err(Error::TooFewAgents { n, minimum: 2 });
    }
    if m == 0 {
        return Err(Error::CapOutOfRange { cap: 0, reward: "n/a".into() });
    }
    cap.check(binomial(u64::from(m) + n as u64 - 2, n as u64 - 2))?;
    Ok(compositions(m, n - 1))
}

/// Every prediction histogram for a single target: `C(n − 1 + m, m)`
/// compositions of `n − 1` into `m + 1` bins.
pub fn enumerate_prediction_reports(n: usize, m: u32, cap: SizeCap) -> Result<Vec<Histogram>> {
    if n < 3 {
        return Err(Error::TooFewAgents { n, minimum: 3 });
    }
    if m == 0 {
        return Err(Error::CapOutOfRange { cap: 0, reward: "n/a".into() });
    }
    cap.check(binomial(n as u64 - 1 + u64::from(m), u64::from(m)))?;
    Ok(compositions((n - 1) as u32, m as usize + 1))
}

/// Histograms valid under `config`, honoring strict mode.
pub fn feasible_histograms(config: &MechanismConfig, cap: SizeCap) -> Result<Vec<Histogram>> {
    let mut all = enumerate_prediction_reports(config.n, config.cap, cap)?;
    if config.strict_counts {
        all.retain(|h| h.iter().all(|&c| c > 0));
    }
    Ok(all)
}

/// Mechanisms whose report lattice can be listed exhaustively.
pub trait ReportSpace: SharingMechanism {
    /// Number of distinct valid reports for one agent.
    fn report_space_size(&self) -> u128;

    /// Every valid report `owner` could submit, in lexicographic order.
    fn report_space(&self, owner: AgentId, cap: SizeCap) -> Result<Vec<Self::Report>>;

    /// Reports that inflate `truthful`'s assessment of `target`: a higher
    /// direct evaluation, or a prediction with a larger expected evaluation
    /// (other targets untouched). Lexicographic order.
    fn inflating_deviations(
        &self,
        truthful: &Self::Report,
        target: AgentId,
        cap: SizeCap,
    ) -> Result<Vec<Self::Report>>;
}

impl ReportSpace for PeerEvaluation {
    fn report_space_size(&self) -> u128 {
        let cfg = self.config();
        binomial(u64::from(cfg.cap) + cfg.n as u64 - 2, cfg.n as u64 - 2)
    }

    fn report_space(&self, owner: AgentId, cap: SizeCap) -> Result<Vec<DirectReport>> {
        let cfg = self.config();
        Ok(enumerate_direct_reports(cfg.n, cfg.cap, cap)?
            .into_iter()
            .map(|v| DirectReport::from_values_unchecked(owner, v))
            .collect())
    }

    fn inflating_deviations(&self, truthful: &DirectReport, target: AgentId, cap: SizeCap) -> Result<Vec<DirectReport>> {
        let current = truthful.evaluation(target);
        Ok(self
            .report_space(truthful.owner(), cap)?
            .into_iter()
            .filter(|r| r.evaluation(target) > current)
            .collect())
    }
}

impl ReportSpace for PeerPrediction {
    fn report_space_size(&self) -> u128 {
        let cfg = self.config();
        let per_target = match feasible_histograms(cfg, SizeCap(u64::MAX)) {
            Ok(h) => h.len() as u128,
            Err(_) => return u128::MAX,
        };
        (0..cfg.n - 1).try_fold(1u128, |acc, _| acc.checked_mul(per_target)).unwrap_or(u128::MAX)
    }

    fn report_space(&self, owner: AgentId, cap: SizeCap) -> Result<Vec<PredictionReport>> {
        let cfg = self.config();
        cap.check(self.report_space_size())?;
        let hists = feasible_histograms(cfg, cap)?;
        let slots = cfg.n - 1;
        let total = self.report_space_size() as usize;
        let mut out = Vec::with_capacity(total);
        let mut digits = vec![0usize; slots];
        for _ in 0..total {
            out.push(PredictionReport::from_histograms_unchecked(
                owner,
                digits.iter().map(|&d| hists[d].clone()).collect(),
            ));
            // odometer with the first peer most significant
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < hists.len() {
                    break;
                }
                *d = 0;
            }
        }
        Ok(out)
    }

    fn inflating_deviations(
        &self,
        truthful: &PredictionReport,
        target: AgentId,
        cap: SizeCap,
    ) -> Result<Vec<PredictionReport>> {
        let current = truthful.histogram(target);
        let current_mass = weighted_sum(current);
        Ok(feasible_histograms(self.config(), cap)?
            .into_iter()
            .filter(|h| weighted_sum(h) > current_mass)
            .map(|h| truthful.with_histogram(target, h))
            .collect())
    }
}

/// `Σ_k k·c_k`.
fn weighted_sum(hist: &[u32]) -> u64 {
    hist.iter().enumerate().map(|(k, &c)| k as u64 * u64::from(c)).sum()
}

/// Every strategy profile of a mechanism, addressable by index (agent 1's
/// report is the most significant digit).
#[derive(Debug, Clone)]
pub struct ProfileSpace<R> {
    spaces: Vec<Vec<R>>,
    len: u64,
}

impl<R: Report> ProfileSpace<R> {
    pub fn new<M>(mechanism: &M, cap: SizeCap) -> Result<Self>
    where
        M: ReportSpace<Report = R>,
    {
        let n = mechanism.config().n;
        let per_agent = mechanism.report_space_size();
        let len = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(per_agent)).unwrap_or(u128::MAX);
        cap.check(len)?;
        let spaces = (1..=n)
            .map(|agent| mechanism.report_space(agent, cap))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProfileSpace { spaces, len: len as u64 })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn agent_space(&self, agent: AgentId) -> &[R] {
        &self.spaces[agent - 1]
    }

    pub fn get(&self, mut index: u64) -> StrategyProfile<R> {
        assert!(index < self.len, "profile index out of range");
        let mut reports: Vec<R> = Vec::with_capacity(self.spaces.len());
        for space in self.spaces.iter().rev() {
            let radix = space.len() as u64;
            reports.push(space[(index % radix) as usize].clone());
            index /= radix;
        }
        reports.reverse();
        StrategyProfile::from_reports_unchecked(reports)
    }

    pub fn iter(&self) -> impl Iterator<Item = StrategyProfile<R>> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}
