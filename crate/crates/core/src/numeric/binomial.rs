use super::mass::Mass;
use crate::error::{Error, Result};
use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::{One, Zero};

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| {
        acc * BigUint::from(n - i) / BigUint::from(i + 1)
    })
}

/// Statistical distance between `S` and `S + 1` for `S ~ Bin(t, 1/2)`,
/// which equals `C(t, floor(t/2)) / 2^t`.
pub fn binomial_shift_sd(t: u64) -> Result<BigRational> {
    if t == 0 {
        return Err(Error::Precondition("t must be at least 1".into()));
    }
    Ok(BigRational::new(
        BigInt::from(binomial(t, t / 2)),
        BigInt::one() << t as usize,
    ))
}

/// Probability that more than half of `2t + 1` independent trials fail,
/// each failing with probability `delta`.
pub fn majority_error_exact(delta: &BigRational, t: u64) -> BigRational {
    let n = 2 * t + 1;
    let (a, b) = (delta.numer().clone(), delta.denom().clone());
    let keep = &b - &a;
    // sum_j C(n, j) a^j (b - a)^(n - j) over b^n, in integers.
    let mut a_pow = num::pow(a.clone(), (t + 1) as usize);
    let mut keep_pows = vec![BigInt::one(); (n - t) as usize];
    for i in 1..keep_pows.len() {
        keep_pows[i] = &keep_pows[i - 1] * &keep;
    }
    let mut sum = BigInt::zero();
    for j in t + 1..=n {
        sum += BigInt::from(binomial(n, j)) * &a_pow * &keep_pows[(n - j) as usize];
        a_pow *= &a;
    }
    BigRational::new(sum, num::pow(b, n as usize))
}

/// Floating-point version of [`majority_error_exact`].
pub fn majority_error(delta: f64, t: u64) -> f64 {
    let n = 2 * t + 1;
    if delta <= 0.0 {
        return 0.0;
    }
    if delta >= 1.0 {
        return 1.0;
    }
    let (ld, lk) = (delta.ln(), (1.0 - delta).ln());
    (t + 1..=n)
        .map(|j| (ln_binomial(n, j) + j as f64 * ld + (n - j) as f64 * lk).exp())
        .sum()
}

/// The tail bound `(4 delta (1 - delta))^t * delta`.
pub fn majority_error_bound(delta: f64, t: u64) -> f64 {
    (4.0 * delta * (1.0 - delta)).powi(t as i32) * delta
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Distance from uniform on `Z_p` of `sum_i U_i`, where `U_i` is uniform on
/// `{a_i, b_i}` and the pairs are `pairs` repeated cyclically to length `t`.
/// The result lists the distance after `0, 1, ..., t` terms.
pub fn smoothing_series<P: Mass>(t: usize, pairs: &[(u64, u64)], p: u64) -> Result<Vec<P>> {
    if p < 2 {
        return Err(Error::Parameter("modulus must be at least 2".into()));
    }
    if pairs.is_empty() {
        return Err(Error::Parameter("at least one pair is needed".into()));
    }
    if let Some(&(a, b)) = pairs.iter().find(|(a, b)| a % p == b % p) {
        return Err(Error::Precondition(format!("pair ({a}, {b}) is constant modulo {p}")));
    }
    if (t as u64).saturating_mul(p) > 10_000_000 {
        return Err(Error::Refused(format!(
            "t * p = {} exceeds the exact-convolution cap",
            t as u64 * p
        )));
    }
    let p_us = p as usize;
    let uniform = P::ratio(1, p);
    let half = P::ratio(1, 2);
    let distance = |d: &[P]| {
        d.iter()
            .fold(P::zero(), |acc, x| acc + (x.clone() - uniform.clone()).abs_val())
            .half()
    };
    let mut dist = vec![P::zero(); p_us];
    dist[0] = P::one();
    let mut out = Vec::with_capacity(t + 1);
    out.push(distance(&dist));
    for i in 0..t {
        let (a, b) = pairs[i % pairs.len()];
        let (a, b) = ((a % p) as usize, (b % p) as usize);
        let next: Vec<P> = (0..p_us)
            .map(|v| (dist[(v + p_us - a) % p_us].clone() + dist[(v + p_us - b) % p_us].clone()) * half.clone())
            .collect();
        dist = next;
        out.push(distance(&dist));
    }
    Ok(out)
}

/// Distance from uniform after exactly `t` terms; see [`smoothing_series`].
pub fn smoothing_check<P: Mass>(t: usize, pairs: &[(u64, u64)], p: u64) -> Result<P> {
    Ok(smoothing_series::<P>(t, pairs, p)?.pop().expect("series is non-empty"))
}
