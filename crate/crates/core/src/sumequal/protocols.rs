use super::{SumDomain, SumEqualInstance};
use crate::bits::{ceil_log2, Message};
use crate::engine::{Coins, OneWayProtocol, PlayerView, RandomnessMode};
use crate::error::{Error, Result};
use crate::numeric::primes_in_range;
use crate::seed::mix64;
use rand::Rng;
use std::sync::Arc;

fn read_incoming(incoming: &Message, width: u32) -> Result<u64> {
    match incoming {
        Message::Bits(b) if b.is_empty() => Ok(0),
        Message::Bits(b) => b
            .reader()
            .read_uint(width)
            .ok_or_else(|| Error::Inconsistent(format!("expected a {width}-bit message"))),
        Message::Frames(_) => Err(Error::Inconsistent("expected a plain message".into())),
    }
}

fn block_sum_mod<X: Copy + Into<i128>>(inputs: &[X], reduce: Option<u64>, q: u64) -> u64 {
    inputs
        .iter()
        .map(|&x| {
            let x: i128 = x.into();
            match reduce {
                Some(m) => x.rem_euclid(m as i128),
                None => x,
            }
        })
        .fold(0i128, |acc, x| (acc + x).rem_euclid(q as i128)) as u64
}

fn pick(primes: &[u64], seed: u64) -> u64 {
    primes[((mix64(seed) as u128 * primes.len() as u128) >> 64) as usize]
}

/// Two-party equality by random-prime fingerprinting: Alice picks a prime
/// `q` from the range with private coins and sends `(q, x mod q)`.
#[derive(Clone, Debug)]
pub struct EqualityFingerprint {
    lo: u64,
    hi: u64,
    primes: Arc<Vec<u64>>,
    width: u32,
}

impl EqualityFingerprint {
    /// Inputs from `[p]` with one-sided error at most `delta`: primes are
    /// drawn from `[delta^-2 log^2 p, 2 delta^-2 log^2 p]`.
    pub fn new(p: u64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::Parameter(format!("delta = {delta} must lie in (0, 1/2)")));
        }
        if p < 2 {
            return Err(Error::Parameter("the input range needs at least two values".into()));
        }
        let l = (p as f64).log2().powi(2) / (delta * delta);
        Self::with_prime_range(l.ceil() as u64, (2.0 * l).floor() as u64)
    }

    pub fn with_prime_range(lo: u64, hi: u64) -> Result<Self> {
        let primes = primes_in_range(lo, hi)?;
        if primes.is_empty() {
            return Err(Error::Parameter(format!(
                "no prime in [{lo}, {hi}]; decrease delta or use a larger range"
            )));
        }
        Ok(EqualityFingerprint {
            lo,
            hi,
            width: 64 - hi.leading_zeros(),
            primes: Arc::new(primes),
        })
    }

    pub fn prime_range(&self) -> (u64, u64) {
        (self.lo, self.hi)
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Exact acceptance probability on `x != y`: the fraction of primes in
    /// the range dividing `|x - y|`.
    pub fn collision_probability(&self, x: i128, y: i128) -> f64 {
        let d = (x - y).unsigned_abs();
        if d == 0 {
            return 1.0;
        }
        let hits = self.primes.iter().filter(|&&q| d.is_multiple_of(q as u128)).count();
        hits as f64 / self.primes.len() as f64
    }
}

impl<X: Copy + Into<i128> + Send + Sync> OneWayProtocol<X> for EqualityFingerprint {
    type Output = u32;

    fn players(&self) -> usize {
        2
    }

    fn randomness(&self) -> RandomnessMode {
        RandomnessMode::PrivateCoins
    }

    fn message(&self, view: &PlayerView<'_, X>, _: &Message, coins: &Coins) -> Result<Message> {
        let q = self.primes[coins.private()?.gen_range(0..self.primes.len())];
        let mut b = crate::bits::BitString::from_uint(q, self.width);
        b.push_uint(block_sum_mod(view.inputs, None, q), self.width);
        Ok(Message::Bits(b))
    }

    fn output(&self, view: &PlayerView<'_, X>, incoming: &Message, _: &Coins) -> Result<u32> {
        let malformed = || Error::Inconsistent("malformed fingerprint".into());
        let bits = incoming.as_bits().ok_or_else(malformed)?;
        let mut r = bits.reader();
        let q = r.read_uint(self.width).ok_or_else(malformed)?;
        let residue = r.read_uint(self.width).ok_or_else(malformed)?;
        if q < 2 {
            return Err(malformed());
        }
        Ok((block_sum_mod(view.inputs, None, q) == residue) as u32)
    }

    fn max_message_bits(&self) -> Option<usize> {
        Some(2 * self.width as usize)
    }
}

/// Deterministic protocol over `Z_m`: pass the running sum modulo `m`.
#[derive(Clone, Debug)]
pub struct SumEqualExact {
    modulus: u64,
    target: u64,
    players: usize,
    width: u32,
}

impl SumEqualExact {
    pub fn new(modulus: u64, target: u64, players: usize) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::Parameter("modulus must be at least 2".into()));
        }
        if players == 0 {
            return Err(Error::Parameter("at least one player is needed".into()));
        }
        Ok(SumEqualExact {
            modulus,
            target: target % modulus,
            players,
            width: ceil_log2(modulus),
        })
    }
}

impl<X: Copy + Into<i128> + Send + Sync> OneWayProtocol<X> for SumEqualExact {
    type Output = u32;

    fn players(&self) -> usize {
        self.players
    }

    fn randomness(&self) -> RandomnessMode {
        RandomnessMode::Deterministic
    }

    fn message(&self, view: &PlayerView<'_, X>, incoming: &Message, _: &Coins) -> Result<Message> {
        let acc = read_incoming(incoming, self.width)?;
        let s = (acc + block_sum_mod(view.inputs, Some(self.modulus), self.modulus)) % self.modulus;
        Ok(Message::uint(s, self.width))
    }

    fn output(&self, view: &PlayerView<'_, X>, incoming: &Message, _: &Coins) -> Result<u32> {
        let acc = read_incoming(incoming, self.width)?;
        let s = (acc + block_sum_mod(view.inputs, Some(self.modulus), self.modulus)) % self.modulus;
        Ok((s == self.target) as u32)
    }

    fn max_message_bits(&self) -> Option<usize> {
        Some(self.width as usize)
    }
}

/// Randomized protocol: the players pass the running sum modulo a prime
/// `q` taken from the common reference string.
///
/// Over the integers the last player accepts when the sum is congruent to
/// the target. Over `Z_m` the inputs are first reduced into `[0, m)`, so the
/// integer sum minus the target is one of `0, m, ..., (k - 1) m` exactly when
/// the instance is equal; the last player accepts when the residue matches
/// one of these. Both are one-sided: equal instances are always accepted.
#[derive(Clone, Debug)]
pub struct SumEqualFingerprint {
    domain: SumDomain,
    k: usize,
    target: i128,
    delta: f64,
    players: usize,
    offsets: Vec<i128>,
    primes: Arc<Vec<u64>>,
    max_width: u32,
}

impl SumEqualFingerprint {
    /// `k` inputs split among `players` players, error at most `delta` on
    /// unequal instances.
    pub fn new(domain: SumDomain, k: usize, target: i64, delta: f64, players: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Parameter(format!("delta = {delta} must lie in (0, 1)")));
        }
        if k == 0 || players == 0 {
            return Err(Error::Parameter("need at least one input and one player".into()));
        }
        let (offsets, target, bad_bits) = match domain {
            SumDomain::Modular { modulus } => {
                if modulus < 2 {
                    return Err(Error::Parameter("modulus must be at least 2".into()));
                }
                let m = modulus as i128;
                let t = (target as i128).rem_euclid(m);
                let offsets: Vec<i128> = (0..k as i128).map(|j| j * m).collect();
                let span = (k as f64) * modulus as f64;
                (offsets, t, k as f64 * span.log2().max(1.0))
            }
            SumDomain::Integers { bound } => {
                let span = (2 * k) as f64 * bound.max(1) as f64 + (target as f64).abs();
                (vec![0], target as i128, span.log2().max(1.0))
            }
        };
        let needed = (bad_bits / delta).ceil() as usize + 1;
        let mut lo = (needed as u64).max(16);
        let primes = loop {
            let primes = primes_in_range(lo, 2 * lo)?;
            if primes.len() >= needed {
                break primes;
            }
            lo *= 2;
        };
        Ok(SumEqualFingerprint {
            domain,
            k,
            target,
            delta,
            players,
            offsets,
            max_width: ceil_log2(*primes.last().expect("non-empty")),
            primes: Arc::new(primes),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of inputs the protocol was configured for.
    pub fn inputs(&self) -> usize {
        self.k
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    fn reduce(&self) -> Option<u64> {
        match self.domain {
            SumDomain::Modular { modulus } => Some(modulus),
            SumDomain::Integers { .. } => None,
        }
    }

    fn prime(&self, coins: &Coins) -> Result<u64> {
        Ok(pick(&self.primes, coins.crs_seed()?))
    }

    /// Exact probability over the prime that `instance` is accepted.
    pub fn acceptance_probability(&self, instance: &SumEqualInstance) -> f64 {
        if instance.is_equal() {
            return 1.0;
        }
        let sum: i128 = match self.reduce() {
            Some(m) => instance.inputs.iter().map(|&x| (x as i128).rem_euclid(m as i128)).sum(),
            None => instance.inputs.iter().map(|&x| x as i128).sum(),
        };
        let base = sum - self.target;
        let hits = self
            .primes
            .iter()
            .filter(|&&q| self.offsets.iter().any(|&o| (base - o).rem_euclid(q as i128) == 0))
            .count();
        hits as f64 / self.primes.len() as f64
    }
}

impl<X: Copy + Into<i128> + Send + Sync> OneWayProtocol<X> for SumEqualFingerprint {
    type Output = u32;

    fn players(&self) -> usize {
        self.players
    }

    fn randomness(&self) -> RandomnessMode {
        RandomnessMode::Crs
    }

    fn message(&self, view: &PlayerView<'_, X>, incoming: &Message, coins: &Coins) -> Result<Message> {
        let q = self.prime(coins)?;
        let w = ceil_log2(q);
        let acc = read_incoming(incoming, w)?;
        let s = (acc + block_sum_mod(view.inputs, self.reduce(), q)) % q;
        Ok(Message::uint(s, w))
    }

    fn output(&self, view: &PlayerView<'_, X>, incoming: &Message, coins: &Coins) -> Result<u32> {
        let q = self.prime(coins)?;
        let acc = read_incoming(incoming, ceil_log2(q))?;
        let s = (acc + block_sum_mod(view.inputs, self.reduce(), q)) % q;
        let residue = (s as i128 - self.target).rem_euclid(q as i128);
        let hit = self.offsets.iter().any(|&o| o.rem_euclid(q as i128) == residue);
        Ok(hit as u32)
    }

    fn max_message_bits(&self) -> Option<usize> {
        Some(self.max_width as usize)
    }
}
