use super::primes::primes_in_range;
use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// A family of hash functions to draw from.
#[derive(Clone, Debug)]
pub enum HashFamily {
    /// `x -> x mod q` for a uniform prime `q` in a range.
    ModRandomPrime { lo: u64, hi: u64, primes: Arc<Vec<u64>> },
    /// `x -> <a, enc(x)> mod 2` for a uniform `a` in `{0,1}^width`.
    InnerProductGf2 { width: u32 },
}

impl HashFamily {
    pub fn mod_random_prime(lo: u64, hi: u64) -> Result<Self> {
        let primes = primes_in_range(lo, hi)?;
        if primes.is_empty() {
            return Err(Error::Parameter(format!("no prime in [{lo}, {hi}]; widen the range")));
        }
        Ok(HashFamily::ModRandomPrime {
            lo,
            hi,
            primes: Arc::new(primes),
        })
    }

    /// Inner-product hashing wide enough for integers with `|x| <= max_abs`.
    pub fn inner_product_for(max_abs: u64) -> Result<Self> {
        let top = max_abs
            .checked_mul(4)
            .and_then(|v| v.checked_add(1))
            .filter(|&v| v <= i64::MAX as u64)
            .ok_or_else(|| Error::Parameter(format!("values up to {max_abs} do not fit the encoding")))?;
        Ok(HashFamily::InnerProductGf2 {
            width: 64 - top.leading_zeros(),
        })
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> HashFn {
        match self {
            HashFamily::ModRandomPrime { primes, .. } => HashFn::ModPrime(primes[rng.gen_range(0..primes.len())]),
            HashFamily::InnerProductGf2 { width } => HashFn::InnerProduct {
                mask: rng.gen::<u64>() & width_mask(*width),
                width: *width,
            },
        }
    }
}

fn width_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1 << width) - 1
    }
}

/// Injective, never-zero encoding of integers as bit vectors: zigzag, then
/// a constant 1 in the lowest bit. Distinct inputs give distinct non-zero
/// vectors, so their inner products with a uniform mask are independent
/// uniform bits.
pub fn gf2_encode(x: i64) -> u64 {
    let zigzag = ((x << 1) ^ (x >> 63)) as u64;
    (zigzag << 1) | 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HashFn {
    ModPrime(u64),
    InnerProduct { mask: u64, width: u32 },
}

impl HashFn {
    pub fn hash(&self, x: i64) -> u64 {
        match *self {
            HashFn::ModPrime(q) => x.rem_euclid(q as i64) as u64,
            HashFn::InnerProduct { mask, width } => {
                let e = gf2_encode(x);
                debug_assert!(e & !width_mask(width) == 0, "value wider than the hash");
                ((e & mask).count_ones() & 1) as u64
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::primes::is_prime;
    use crate::seed::rng_from;

    #[test]
    fn drawn_primes_lie_in_range() {
        let fam = HashFamily::mod_random_prime(100, 200).unwrap();
        let mut rng = rng_from(1);
        for _ in 0..200 {
            match fam.draw(&mut rng) {
                HashFn::ModPrime(q) => assert!((100..=200).contains(&q) && is_prime(q)),
                other => panic!("unexpected {other:?}"),
            }
        }
        assert!(HashFamily::mod_random_prime(24, 28).is_err());
    }

    #[test]
    fn encoding_is_injective_and_nonzero() {
        let mut seen = std::collections::HashSet::new();
        for x in -1000..=1000 {
            let e = gf2_encode(x);
            assert_ne!(e, 0);
            assert!(seen.insert(e));
        }
    }

    #[test]
    fn inner_product_bits_are_balanced_on_distinct_inputs() {
        let fam = HashFamily::inner_product_for(50).unwrap();
        let mut rng = rng_from(9);
        let n = 20_000;
        let mut collide = 0;
        for _ in 0..n {
            let h = fam.draw(&mut rng);
            collide += (h.hash(-17) == h.hash(23)) as u32;
        }
        let rate = collide as f64 / n as f64;
        assert!((rate - 0.5).abs() < 0.02, "rate {rate}");
    }
}
