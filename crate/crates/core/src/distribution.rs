//! Input distributions over finite product domains.

use crate::error::{Error, Result};
use crate::function::Domain;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Anything that can draw a full input vector.
pub trait InputSampler<X>: Sync {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<X>;
}

/// A distribution with known point probabilities.
pub trait InputDistribution: InputSampler<u32> {
    fn alphabets(&self) -> &[u32];
    fn prob(&self, x: &[u32]) -> f64;
    /// `Some` when the distribution factors over coordinates.
    fn as_product(&self) -> Option<&ProductDistribution> {
        None
    }
}

fn sample_index(weights_cdf: &[f64], rng: &mut ChaCha8Rng) -> u32 {
    let u: f64 = rng.gen::<f64>() * weights_cdf[weights_cdf.len() - 1];
    weights_cdf.partition_point(|&c| c <= u).min(weights_cdf.len() - 1) as u32
}

fn cdf(weights: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::Config("empty marginal".into()));
    }
    if w.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::Config("probabilities must be finite and non-negative".into()));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// Independent coordinates with the given marginals.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductDistribution {
    alphabets: Vec<u32>,
    marginals: Vec<Vec<f64>>,
    cdfs: Vec<Vec<f64>>,
}

impl ProductDistribution {
    pub fn new(marginals: Vec<Vec<f64>>) -> Result<Self> {
        for m in &marginals {
            check_weights(m)?;
        }
        Ok(ProductDistribution {
            alphabets: marginals.iter().map(|m| m.len() as u32).collect(),
            cdfs: marginals.iter().map(|m| cdf(m)).collect(),
            marginals,
        })
    }

    pub fn uniform(alphabets: &[u32]) -> Result<Self> {
        Self::new(alphabets.iter().map(|&a| vec![1.0 / a as f64; a as usize]).collect())
    }

    pub fn marginal(&self, j: usize) -> &[f64] {
        &self.marginals[j]
    }

    /// Probability of the values `x` at coordinates `start..start + x.len()`.
    pub fn block_prob(&self, start: usize, x: &[u32]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, &v)| self.marginals[start + i][v as usize])
            .product()
    }
}

impl InputSampler<u32> for ProductDistribution {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<u32> {
        self.cdfs.iter().map(|c| sample_index(c, rng)).collect()
    }
}

impl InputDistribution for ProductDistribution {
    fn alphabets(&self) -> &[u32] {
        &self.alphabets
    }

    fn prob(&self, x: &[u32]) -> f64 {
        self.block_prob(0, x)
    }

    fn as_product(&self) -> Option<&ProductDistribution> {
        Some(self)
    }
}

/// An arbitrary distribution given point by point.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    domain: Domain,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl JointDistribution {
    pub fn new(alphabets: Vec<u32>, probs: Vec<f64>) -> Result<Self> {
        let domain = Domain::new(alphabets);
        if domain.size() != Some(probs.len() as u64) {
            return Err(Error::Config("probability table does not match the domain".into()));
        }
        check_weights(&probs)?;
        Ok(JointDistribution {
            cdf: cdf(&probs),
            domain,
            probs,
        })
    }
}

impl InputSampler<u32> for JointDistribution {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<u32> {
        self.domain.decode(sample_index(&self.cdf, rng) as u64)
    }
}

impl InputDistribution for JointDistribution {
    fn alphabets(&self) -> &[u32] {
        self.domain.alphabets()
    }

    fn prob(&self, x: &[u32]) -> f64 {
        self.probs[self.domain.index_of(x) as usize]
    }
}
