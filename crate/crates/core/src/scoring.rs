//! The quadratic scoring rule, nearest-integer rounding and the conversion
//! from predicted histograms to probability distributions.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Finite probability distribution with exact rational weights.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Distribution {
    probabilities: Vec<Rational>,
}

impl Distribution {
    pub fn new(probabilities: Vec<Rational>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if let Some(p) = probabilities.iter().find(|p| p.is_negative()) {
            return Err(Error::InvalidDistribution(format!("negative probability {p}")));
        }
        let total: Rational = probabilities.iter().sum();
        if total != Rational::one() {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Distribution { probabilities })
    }

    /// Point mass on `outcome` among `outcomes` possibilities.
    pub fn point(outcome: usize, outcomes: usize) -> Self {
        assert!(outcome < outcomes);
        let probabilities = (0..outcomes)
            .map(|k| if k == outcome { Rational::one() } else { Rational::zero() })
            .collect();
        Distribution { probabilities }
    }

    pub fn probabilities(&self) -> &[Rational] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Mean of the outcome index, `Σ k·p_k`.
    pub fn mean(&self) -> Rational {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| p * Rational::from(k))
            .sum()
    }

    /// `Σ_k (p_k - q_k)²`.
    pub fn squared_distance(&self, other: &Distribution) -> Rational {
        assert_eq!(self.len(), other.len());
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(p, q)| (p - q).square())
            .sum()
    }
}

/// `R(p, e) = 1 + 2·p_e − Σ_j p_j²`, always within `[0, 2]`.
pub fn quadratic_score(p: &Distribution, outcome: usize) -> Result<Rational> {
    let Some(p_e) = p.probabilities.get(outcome) else {
        return Err(Error::OutcomeOutOfRange { outcome, outcomes: p.len() });
    };
    let sum_sq: Rational = p.probabilities.iter().map(Rational::square).sum();
    Ok(Rational::one() + p_e * Rational::from_integer(2) - sum_sq)
}

/// Expected quadratic score of forecast `p` when outcomes follow `q`.
pub fn expected_score(p: &Distribution, q: &Distribution) -> Result<Rational> {
    if p.len() != q.len() {
        return Err(Error::InvalidDistribution(format!(
            "forecast has {} outcomes, belief has {}",
            p.len(),
            q.len()
        )));
    }
    let mut total = Rational::zero();
    for (e, q_e) in q.probabilities.iter().enumerate() {
        if !q_e.is_zero() {
            total += q_e * quadratic_score(p, e)?;
        }
    }
    Ok(total)
}

/// Nearest integer with ties rounded toward positive infinity: `⌊x + 1/2⌋`.
pub fn nint(x: &Rational) -> BigInt {
    (x + Rational::new(1, 2)).floor()
}

/// `(c_0/total, …, c_M/total)`.
pub fn distribution_from_histogram(counts: &[u32], total: u32) -> Result<Distribution> {
    let sum: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    if total == 0 || sum != u64::from(total) {
        return Err(Error::TotalMismatch { expected: total.into(), found: sum });
    }
    let denom = i64::from(total);
    let probabilities = counts
        .iter()
        .map(|&c| Rational::new(i64::from(c), denom))
        .collect();
    Ok(Distribution { probabilities })
}
