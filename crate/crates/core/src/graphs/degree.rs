use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::SimRng;

const SUM_TOL: f64 = 1e-12;

/// Finite-support probability mass function over degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    pmf: BTreeMap<usize, f64>,
}

impl DegreeDistribution {
    /// Builds a distribution from (degree, probability) pairs. Zero-mass
    /// entries are dropped; probabilities must be non-negative and sum
    /// to one within 1e-12.
    pub fn new<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> Result<Self> {
        let mut pmf = BTreeMap::new();
        for (k, p) in pairs {
            if p < 0.0 {
                return Err(Error::Degree(format!("negative probability {p} at degree {k}")));
            }
            if p > 0.0 {
                *pmf.entry(k).or_insert(0.0) += p;
            }
        }
        if pmf.is_empty() {
            return Err(Error::Degree("empty support".into()));
        }
        let total: f64 = pmf.values().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Degree(format!("probabilities sum to {total}, not 1")));
        }
        Ok(DegreeDistribution { pmf })
    }

    /// Point mass at degree `k`.
    pub fn delta(k: usize) -> Self {
        DegreeDistribution {
            pmf: BTreeMap::from([(k, 1.0)]),
        }
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.pmf.get(&k).copied().unwrap_or(0.0)
    }

    /// Support in increasing order.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.pmf.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pmf.iter().map(|(&k, &p)| (k, p))
    }

    pub fn d_max(&self) -> usize {
        *self.pmf.keys().next_back().unwrap()
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().map(|(&k, &p)| k as f64 * p).sum()
    }

    /// Size-biased offspring distribution: `θ̂(k) = (k+1)θ(k+1) / Σ n θ(n)`.
    pub fn size_biased(&self) -> Result<DegreeDistribution> {
        let mean = self.mean();
        if mean <= 0.0 {
            return Err(Error::Degree(
                "size-biased distribution undefined for zero-mean degree law".into(),
            ));
        }
        let pmf: BTreeMap<usize, f64> = self
            .pmf
            .iter()
            .filter(|(&k, _)| k >= 1)
            .map(|(&k, &p)| (k - 1, k as f64 * p / mean))
            .collect();
        Ok(DegreeDistribution { pmf })
    }

    pub fn sample(&self, rng: &mut SimRng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (&k, &p) in &self.pmf {
            acc += p;
            if u < acc {
                return k;
            }
        }
        *self.pmf.keys().next_back().unwrap()
    }
}
