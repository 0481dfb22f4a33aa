use crate::error::{Error, Result};
use crate::numeric::{binomial, BigRational, HashFamily, HashFn, Mass};
use crate::seed::derived_rng;
use crate::sumequal::AugIndexSample;
use num::bigint::BigInt;
use serde::Serialize;

/// Probability that Alice's majority bit differs from Bob's flipped bit on
/// an active coordinate when the queried copy is equal:
/// `sum_{s=0}^{(n''-1)/2} 2^(1-n'') C(n''-1, s)`.
pub fn disagreement_bias(n_double_prime: u64) -> Result<BigRational> {
    if n_double_prime.is_multiple_of(2) {
        return Err(Error::Parameter(format!("n'' = {n_double_prime} must be odd")));
    }
    let n = n_double_prime;
    let num = (0..=(n - 1) / 2).fold(BigInt::from(0), |acc, s| acc + BigInt::from(binomial(n - 1, s)));
    Ok(BigRational::new(num * 2, BigInt::from(1) << n as usize))
}

/// `1/2 + C(n''-1, (n''-1)/2) / 2^n''`, the same quantity in closed form.
pub fn disagreement_bias_closed_form(n_double_prime: u64) -> Result<BigRational> {
    if n_double_prime.is_multiple_of(2) {
        return Err(Error::Parameter(format!("n'' = {n_double_prime} must be odd")));
    }
    let n = n_double_prime;
    Ok(<BigRational as Mass>::ratio(1, 2)
        + BigRational::new(
            BigInt::from(binomial(n - 1, (n - 1) / 2)),
            BigInt::from(1) << n as usize,
        ))
}

/// The exact bias next to the lower bound `1/2 + 1/(2 sqrt(n''))` that is
/// often quoted for it, and the expected gap values that follow.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasReport {
    pub n_prime: usize,
    pub n_double_prime: usize,
    pub padding: usize,
    pub exact_bias: String,
    pub exact_bias_f64: f64,
    pub claimed_bound: f64,
    pub exact_below_claim: bool,
    /// `-pad + (n' - pad)(2b - 1)` with the exact bias `b`.
    pub expected_hse_equal: f64,
    pub expected_hse_unequal: f64,
    /// `-pad + (n' - pad) / sqrt(n'')`, what the quoted bound would give.
    pub claimed_hse_equal: f64,
}

pub fn padding(n_prime: usize) -> usize {
    (10.0 * (n_prime as f64).sqrt()).ceil() as usize
}

pub fn bias_report(n_prime: usize, n_double_prime: usize) -> Result<BiasReport> {
    let exact = disagreement_bias(n_double_prime as u64)?;
    let pad = padding(n_prime);
    if pad >= n_prime {
        return Err(Error::Parameter(format!(
            "n' = {n_prime} leaves no room after {pad} padding coordinates"
        )));
    }
    let b = Mass::to_f64(&exact);
    let claimed = 0.5 + 0.5 / (n_double_prime as f64).sqrt();
    let active = (n_prime - pad) as f64;
    Ok(BiasReport {
        n_prime,
        n_double_prime,
        padding: pad,
        exact_bias: exact.to_string(),
        exact_bias_f64: b,
        claimed_bound: claimed,
        exact_below_claim: b < claimed,
        expected_hse_equal: -(pad as f64) + active * (2.0 * b - 1.0),
        expected_hse_unequal: -(pad as f64),
        claimed_hse_equal: -(pad as f64) + active / (n_double_prime as f64).sqrt(),
    })
}

/// `n' x n''` hash functions, row-major, drawn once from a seed.
#[derive(Clone, Debug)]
pub struct HashGrid {
    rows: usize,
    cols: usize,
    fns: Vec<HashFn>,
}

impl HashGrid {
    pub fn draw(family: &HashFamily, rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = derived_rng(seed, "hash-grid", 0);
        HashGrid {
            rows,
            cols,
            fns: (0..rows * cols).map(|_| family.draw(&mut rng)).collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> HashFn {
        debug_assert!(i < self.rows && j < self.cols);
        self.fns[i * self.cols + j]
    }
}

/// Output of the reduction: the two bit vectors of a gap instance on `n'`
/// coordinates, the last `padding` of which are zero on both sides.
#[derive(Clone, Debug, Serialize)]
pub struct GhseReduction {
    pub alice: Vec<u8>,
    pub bob: Vec<u8>,
    pub padding: usize,
    /// 1-based queried copy.
    pub query: usize,
    pub equal_at_query: bool,
    /// Set when `n' < 900 n''`.
    pub outside_paper_regime: bool,
    pub bias: BiasReport,
}

/// Alice's value of copy `j` is the first player's input, Bob's is minus
/// the sum of the others, so the copy is equal exactly when they coincide.
pub fn split_copy(row: &[i64]) -> (i64, i64) {
    (row[0], -row[1..].iter().sum::<i64>())
}

/// Hash family wide enough for every value the reduction will hash.
pub fn default_family(sample: &AugIndexSample) -> Result<HashFamily> {
    let max_abs = sample
        .rows
        .iter()
        .map(|r| {
            let (x, y) = split_copy(r);
            x.unsigned_abs().max(y.unsigned_abs())
        })
        .max()
        .unwrap_or(0);
    HashFamily::inner_product_for(max_abs)
}

/// Maps an augmented-index sample with `n''` copies to a gap instance on
/// `n'` coordinates: Alice's bit `i` is the majority over copies of
/// `h_ij(X_j)`, Bob's is `1 - h_{i j*}(Y_{j*})` for the queried copy `j*`.
pub fn augindex_to_ghse(
    sample: &AugIndexSample,
    n_prime: usize,
    family: &HashFamily,
    seed: u64,
) -> Result<GhseReduction> {
    let n2 = sample.m;
    if n2.is_multiple_of(2) {
        return Err(Error::Parameter(format!("n'' = {n2} must be odd")));
    }
    let bias = bias_report(n_prime, n2)?;
    let active = n_prime - bias.padding;
    let grid = HashGrid::draw(family, active, n2, seed);
    let copies: Vec<(i64, i64)> = sample.rows.iter().map(|r| split_copy(r)).collect();
    let query = sample.index;
    let (_, y_query) = copies[query - 1];
    let mut alice = vec![0u8; n_prime];
    let mut bob = vec![0u8; n_prime];
    for i in 0..active {
        let ones: usize = copies
            .iter()
            .enumerate()
            .map(|(j, &(x, _))| grid.get(i, j).hash(x) as usize)
            .sum();
        alice[i] = (2 * ones > n2) as u8;
        bob[i] = 1 - grid.get(i, query - 1).hash(y_query) as u8;
    }
    Ok(GhseReduction {
        alice,
        bob,
        padding: bias.padding,
        query,
        equal_at_query: copies[query - 1].0 == copies[query - 1].1,
        outside_paper_regime: n_prime < 900 * n2,
        bias,
    })
}
