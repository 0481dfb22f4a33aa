use crate::error::{Error, Result};
use num::bigint::BigUint;
use num::integer::Integer;
use num::One;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes in `[lo, hi]`.
pub fn primes_in_range(lo: u64, hi: u64) -> Result<Vec<u64>> {
    if lo > hi {
        return Err(Error::Precondition(format!("empty range [{lo}, {hi}]")));
    }
    if hi - lo > 1 << 32 {
        return Err(Error::Refused(format!("range [{lo}, {hi}] is too wide to list")));
    }
    Ok((lo.max(2)..=hi).filter(|&n| is_prime(n)).collect())
}

/// `lcm(1, ..., a)`.
pub fn lcm_upto(a: u64) -> BigUint {
    (1..=a).fold(BigUint::one(), |acc, i| acc.lcm(&BigUint::from(i)))
}

/// `lcm(1, ..., a)` as a `u64`, refusing when it does not fit.
pub fn lcm_upto_u64(a: u64) -> Result<u64> {
    let mut acc: u64 = 1;
    for i in 1..=a {
        acc = (acc / acc.gcd(&i))
            .checked_mul(i)
            .ok_or_else(|| Error::Refused(format!("lcm(1..{a}) overflows 64 bits")))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn agrees_with_trial_division() {
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial_division(n), "n = {n}");
        }
        assert!(is_prime(2_305_843_009_213_693_951));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn small_lcms() {
        let expected = [1u64, 1, 2, 6, 12, 60, 60, 420, 840, 2520, 2520];
        for (a, &e) in expected.iter().enumerate() {
            assert_eq!(lcm_upto_u64(a as u64).unwrap(), e);
            assert_eq!(lcm_upto(a as u64), BigUint::from(e));
        }
        assert!(lcm_upto_u64(60).is_err());
    }

    #[test]
    fn prime_ranges() {
        assert_eq!(primes_in_range(10, 30).unwrap(), vec![11, 13, 17, 19, 23, 29]);
        assert!(primes_in_range(5, 4).is_err());
        assert!(primes_in_range(24, 28).unwrap().is_empty());
    }
}
