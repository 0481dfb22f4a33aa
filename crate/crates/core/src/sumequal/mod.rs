//! Sum-Equal: decide whether the players' inputs sum to a target.

mod distributions;
mod protocols;
mod rectangle;

pub use distributions::{
    augindex_distribution, augindex_distribution_with, direct_sum_distribution, viola_product_distribution,
    AugIndexConfig, AugIndexReport, AugIndexSample, DirectSumSample, DirectSumSampler, ViolaProductSampler,
};
pub use protocols::{EqualityFingerprint, SumEqualExact, SumEqualFingerprint};
pub use rectangle::{rectangle_conditional_probe, ProbeReport, Rectangle};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Where the inputs live.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SumDomain {
    /// Inputs and target in `Z_m`.
    Modular { modulus: u64 },
    /// Integers with `|x_j| <= bound` for `j < k` and `|x_k| <= k * bound`.
    Integers { bound: i64 },
}

/// One Sum-Equal instance. The answer is 1 when the sum equals the target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumEqualInstance {
    pub domain: SumDomain,
    pub inputs: Vec<i64>,
    pub target: i64,
}

impl SumEqualInstance {
    pub fn new(domain: SumDomain, inputs: Vec<i64>, target: i64) -> Result<Self> {
        let k = inputs.len();
        if k == 0 {
            return Err(Error::Config("an instance needs at least one input".into()));
        }
        match domain {
            SumDomain::Modular { modulus } => {
                if modulus < 2 {
                    return Err(Error::Parameter("modulus must be at least 2".into()));
                }
                let m = modulus as i64;
                if let Some(x) = inputs.iter().chain([&target]).find(|&&x| !(0..m).contains(&x)) {
                    return Err(Error::Config(format!("value {x} is outside Z_{modulus}")));
                }
            }
            SumDomain::Integers { bound } => {
                if bound < 0 {
                    return Err(Error::Parameter("bound must be non-negative".into()));
                }
                let last_bound = bound.saturating_mul(k as i64);
                for (j, &x) in inputs.iter().enumerate() {
                    let b = if j + 1 == k { last_bound } else { bound };
                    if x.abs() > b {
                        return Err(Error::Config(format!("input {j} = {x} exceeds bound {b}")));
                    }
                }
            }
        }
        Ok(SumEqualInstance { domain, inputs, target })
    }

    pub fn k(&self) -> usize {
        self.inputs.len()
    }

    /// `sum - target` as an integer (for modular instances, before reduction).
    pub fn discrepancy(&self) -> i128 {
        self.inputs.iter().map(|&x| x as i128).sum::<i128>() - self.target as i128
    }

    pub fn is_equal(&self) -> bool {
        match self.domain {
            SumDomain::Modular { modulus } => self.discrepancy().rem_euclid(modulus as i128) == 0,
            SumDomain::Integers { .. } => self.discrepancy() == 0,
        }
    }

    /// 1 when equal, 0 otherwise.
    pub fn answer(&self) -> u32 {
        self.is_equal() as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_and_answers() {
        let inst = SumEqualInstance::new(SumDomain::Modular { modulus: 5 }, vec![1, 2, 2], 0).unwrap();
        assert!(inst.is_equal());
        assert!(SumEqualInstance::new(SumDomain::Modular { modulus: 5 }, vec![5], 0).is_err());
        let inst = SumEqualInstance::new(SumDomain::Integers { bound: 3 }, vec![3, -3, 6], 6).unwrap();
        assert_eq!(inst.answer(), 1);
        assert!(SumEqualInstance::new(SumDomain::Integers { bound: 3 }, vec![4, 0], 0).is_err());
        let json = serde_json::to_string(&inst).unwrap();
        assert_eq!(serde_json::from_str::<SumEqualInstance>(&json).unwrap(), inst);
    }
}
