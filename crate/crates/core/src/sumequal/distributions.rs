use super::{SumDomain, SumEqualInstance};
use crate::distribution::ProductDistribution;
use crate::error::{Error, Result};
use crate::numeric::{is_prime, lcm_upto_u64};
use crate::seed::rng_from;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{p} is not prime")))
    }
}

/// Endless stream of instances uniform over `Z_p^k` with target 0.
pub struct ViolaProductSampler {
    k: usize,
    p: u64,
    rng: ChaCha8Rng,
}

/// Sampler for the uniform product distribution on `Z_p^k`.
pub fn viola_product_distribution(k: usize, p: u64, seed: u64) -> Result<ViolaProductSampler> {
    check_prime(p)?;
    if k == 0 {
        return Err(Error::Parameter("k must be positive".into()));
    }
    Ok(ViolaProductSampler {
        k,
        p,
        rng: rng_from(seed),
    })
}

impl ViolaProductSampler {
    pub fn distribution(&self) -> ProductDistribution {
        ProductDistribution::uniform(&vec![self.p as u32; self.k]).expect("uniform marginals are valid")
    }
}

impl Iterator for ViolaProductSampler {
    type Item = SumEqualInstance;

    fn next(&mut self) -> Option<SumEqualInstance> {
        let inputs = (0..self.k).map(|_| self.rng.gen_range(0..self.p) as i64).collect();
        Some(SumEqualInstance {
            domain: SumDomain::Modular { modulus: self.p },
            inputs,
            target: 0,
        })
    }
}

/// `m` independent rows over `Z_p^k`. Each row comes from `G` (uniform
/// with sum 0) or, when its label is 1, from `B` (the same with 1 added to
/// the last coordinate, so the sum is 1).
#[derive(Clone, Debug, Serialize)]
pub struct DirectSumSample {
    pub k: usize,
    pub m: usize,
    pub p: u64,
    pub rows: Vec<Vec<u64>>,
    pub labels: Vec<u8>,
    /// Set when `p` is outside `(k^(1/4), 2 k^(1/4))`.
    pub outside_paper_regime: bool,
}

impl DirectSumSample {
    /// 1 when the row sum is non-zero, i.e. the negation of Sum-Equal.
    pub fn flipped_outputs(&self) -> Vec<u8> {
        self.rows
            .iter()
            .map(|r| (r.iter().sum::<u64>() % self.p != 0) as u8)
            .collect()
    }

    pub fn instance(&self, row: usize) -> SumEqualInstance {
        SumEqualInstance {
            domain: SumDomain::Modular { modulus: self.p },
            inputs: self.rows[row].iter().map(|&x| x as i64).collect(),
            target: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DirectSumSampler {
    k: usize,
    m: usize,
    p: u64,
}

impl DirectSumSampler {
    pub fn new(k: usize, m: usize, p: u64) -> Result<Self> {
        check_prime(p)?;
        if k < 2 {
            return Err(Error::Parameter("k must be at least 2".into()));
        }
        Ok(DirectSumSampler { k, m, p })
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> DirectSumSample {
        let mut rows = Vec::with_capacity(self.m);
        let mut labels = Vec::with_capacity(self.m);
        for _ in 0..self.m {
            let mut row: Vec<u64> = (0..self.k - 1).map(|_| rng.gen_range(0..self.p)).collect();
            let s = row.iter().sum::<u64>() % self.p;
            let label = rng.gen_range(0..2u8);
            row.push((self.p - s + label as u64) % self.p);
            rows.push(row);
            labels.push(label);
        }
        let root = (self.k as f64).powf(0.25);
        DirectSumSample {
            k: self.k,
            m: self.m,
            p: self.p,
            rows,
            labels,
            outside_paper_regime: !((self.p as f64) > root && (self.p as f64) < 2.0 * root),
        }
    }
}

pub fn direct_sum_distribution(k: usize, m: usize, p: u64, seed: u64) -> Result<DirectSumSample> {
    Ok(DirectSumSampler::new(k, m, p)?.sample(&mut rng_from(seed)))
}

#[derive(Clone, Debug)]
pub struct AugIndexConfig {
    /// Constant in the report-only check `lcm(1..a) <= 2^(c' a)`.
    pub c_prime: f64,
}

impl Default for AugIndexConfig {
    fn default() -> Self {
        AugIndexConfig { c_prime: 2.0 }
    }
}

/// Magnitude checks on an augmented-index sample. None of them is enforced.
#[derive(Clone, Debug, Serialize)]
pub struct AugIndexReport {
    pub lcm: u64,
    /// Last coordinate of both `G` and `B` rows within `k * a`.
    pub last_coordinate_within_bound: bool,
    pub c_prime: f64,
    pub lcm_within_exponent: bool,
    /// `lcm^8 <= k`.
    pub lcm_within_k_root: bool,
}

/// `m` rows of `k` integers with an index `n`; rows after the index come
/// with their answers.
///
/// The first `k - 1` entries of a row are uniform in `{1, ..., a}`. A `G`
/// row ends with minus their sum; a `B` row ends with `M` minus their sum,
/// where `M = lcm(1, ..., a)`.
#[derive(Clone, Debug, Serialize)]
pub struct AugIndexSample {
    pub k: usize,
    pub m: usize,
    pub a: u64,
    pub rows: Vec<Vec<i64>>,
    /// True for `G` rows (sum zero).
    pub equal: Vec<bool>,
    /// 1-based query index.
    pub index: usize,
    /// `(copy, answer)` for the copies after the index, 1 meaning equal.
    pub answers: Vec<(usize, u32)>,
    pub report: AugIndexReport,
}

impl AugIndexSample {
    /// Default magnitude `max(1, floor(log2(k) / 8))`.
    pub fn default_magnitude(k: usize) -> u64 {
        ((k as f64).log2() / 8.0).floor().max(1.0) as u64
    }

    pub fn instance(&self, copy: usize) -> SumEqualInstance {
        let row = &self.rows[copy];
        let a = self.a as i64;
        let last = row.last().map_or(0, |x| x.abs());
        let k = self.k as i64;
        let bound = a.max((last + k - 1) / k);
        SumEqualInstance {
            domain: SumDomain::Integers { bound },
            inputs: row.clone(),
            target: 0,
        }
    }

    /// Answer at the query index.
    pub fn queried_answer(&self) -> u32 {
        self.equal[self.index - 1] as u32
    }
}

pub fn augindex_distribution(k: usize, m: usize, a: u64, seed: u64) -> Result<AugIndexSample> {
    augindex_distribution_with(k, m, a, &AugIndexConfig::default(), &mut rng_from(seed))
}

pub fn augindex_distribution_with(
    k: usize,
    m: usize,
    a: u64,
    config: &AugIndexConfig,
    rng: &mut ChaCha8Rng,
) -> Result<AugIndexSample> {
    if k < 2 || m == 0 || a == 0 {
        return Err(Error::Parameter("need k >= 2, m >= 1 and a >= 1".into()));
    }
    let lcm = lcm_upto_u64(a).map_err(|_| {
        let largest = (1..a).rev().find(|&b| lcm_upto_u64(b).is_ok()).unwrap_or(1);
        Error::Refused(format!(
            "lcm(1..{a}) overflows 64 bits; the largest magnitude that fits is {largest}"
        ))
    })?;
    (k as u64 - 1)
        .checked_mul(a)
        .and_then(|s| s.checked_add(lcm))
        .filter(|&s| s <= i64::MAX as u64)
        .ok_or_else(|| Error::Refused("row values overflow 64-bit integers".into()))?;
    let mut rows = Vec::with_capacity(m);
    let mut equal = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row: Vec<i64> = (0..k - 1).map(|_| rng.gen_range(1..=a) as i64).collect();
        let s: i64 = row.iter().sum();
        let is_g = rng.gen_bool(0.5);
        row.push(if is_g { -s } else { lcm as i64 - s });
        rows.push(row);
        equal.push(is_g);
    }
    let index = rng.gen_range(1..=m);
    let answers = (index + 1..=m).map(|j| (j, equal[j - 1] as u32)).collect();
    let (ka, low, high) = (k as i128 * a as i128, (k as i128 - 1) * a as i128, k as i128 - 1);
    let m_big = lcm as i128;
    let report = AugIndexReport {
        lcm,
        last_coordinate_within_bound: (m_big - low).abs() <= ka && (m_big - high).abs() <= ka,
        c_prime: config.c_prime,
        lcm_within_exponent: (lcm as f64).log2() <= config.c_prime * a as f64,
        lcm_within_k_root: (lcm as f64).powi(8) <= k as f64,
    };
    Ok(AugIndexSample {
        k,
        m,
        a,
        rows,
        equal,
        index,
        answers,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_sum_labels_match_row_sums() {
        let s = direct_sum_distribution(16, 500, 3, 7).unwrap();
        for (row, &label) in s.rows.iter().zip(&s.labels) {
            assert_eq!(row.iter().sum::<u64>() % 3, label as u64);
        }
        assert_eq!(s.flipped_outputs(), s.labels);
        assert!(!s.outside_paper_regime);
        assert!(direct_sum_distribution(16, 5, 101, 0).unwrap().outside_paper_regime);
        assert!(direct_sum_distribution(16, 5, 4, 0).is_err());
    }

    #[test]
    fn augindex_rows() {
        let s = augindex_distribution(10, 20, 3, 1).unwrap();
        assert_eq!(s.report.lcm, 6);
        for (row, &eq) in s.rows.iter().zip(&s.equal) {
            assert!(row[..9].iter().all(|&x| (1..=3).contains(&x)));
            let sum: i64 = row.iter().sum();
            assert_eq!(sum, if eq { 0 } else { 6 });
        }
        assert_eq!(s.answers.len(), 20 - s.index);
        for &(j, ans) in &s.answers {
            assert_eq!(s.instance(j - 1).answer(), ans);
        }
        assert!(augindex_distribution(4, 1, 60, 0)
            .unwrap_err()
            .to_string()
            .contains("largest"));
    }

    #[test]
    fn viola_marginals_are_uniform() {
        let s = viola_product_distribution(3, 5, 0).unwrap();
        let d = s.distribution();
        assert_eq!(d.marginal(2), &[0.2; 5]);
        assert!(viola_product_distribution(3, 6, 0).is_err());
    }
}
