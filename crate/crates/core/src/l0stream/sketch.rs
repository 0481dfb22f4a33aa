use super::stream::{TurnstileStream, Update};
use crate::error::{Error, Result};
use crate::numeric::is_prime;
use crate::seed::{derive_seed, derived_rng};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Level selection stops at the first level whose occupancy is at most this
/// fraction of the buckets.
const LOAD_THRESHOLD: f64 = 0.7;

/// Shape of one sketch copy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SketchParams {
    pub epsilon: f64,
    /// `ceil(2 / epsilon^2)` buckets per level.
    pub buckets: usize,
    /// `ceil(log2 N) + 1` subsampling levels.
    pub levels: usize,
    /// Bit width of the counter prime.
    pub width: u32,
    /// Number of 8-bit characters of a hashed index.
    pub chars: usize,
}

impl SketchParams {
    /// Parameters for streams over `[dimension]` with at most `updates`
    /// updates of magnitude at most `magnitude`.
    ///
    /// Counters live modulo a random prime of
    /// `log2(1/eps) + log2 log2(m M) + 4` bits (clamped to `[8, 31]`), so a
    /// bucket reads zero by accident with probability about
    /// `eps / log(mM)`. Total counter space is
    /// `O(eps^-2 log N (log(1/eps) + log log(mM)))` bits.
    pub fn new(epsilon: f64, dimension: usize, updates: usize, magnitude: i64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon = {epsilon} must lie in (0, 1)")));
        }
        if dimension == 0 {
            return Err(Error::Parameter("dimension must be positive".into()));
        }
        let buckets = (2.0 / (epsilon * epsilon)).ceil() as usize;
        let levels = (dimension as f64).log2().ceil() as usize + 1;
        let mass = (updates.max(2) as f64) * (magnitude.max(1) as f64);
        let width = ((1.0 / epsilon).log2().ceil() + mass.log2().max(2.0).log2().ceil() + 4.0).clamp(8.0, 31.0) as u32;
        let key_bits = 64 - (dimension as u64).leading_zeros() as usize;
        Ok(SketchParams {
            epsilon,
            buckets,
            levels,
            width,
            chars: key_bits.div_ceil(8).max(1),
        })
    }

    pub fn for_stream(epsilon: f64, stream: &TurnstileStream) -> Result<Self> {
        Self::new(epsilon, stream.dimension(), stream.len(), stream.magnitude())
    }

    pub fn counters(&self) -> usize {
        self.buckets * self.levels
    }

    /// Exact footprint of one copy: the counters, the prime and the hash
    /// tables.
    pub fn space_bits(&self) -> u64 {
        self.counters() as u64 * self.width as u64 + self.width as u64 + (self.chars * 256 * 64) as u64
    }
}

/// Level-sampled linear counting with counters modulo a random prime.
///
/// Index `i` is hashed once with simple tabulation. The low half of the hash
/// picks the deepest level `lz` (trailing zeros), the high half picks a
/// bucket, and the update is added to that bucket on levels `0..=lz`. Level
/// `j` therefore sees each coordinate with probability `2^-j`, and its
/// number of non-zero buckets estimates the surviving support.
#[derive(Clone, Debug, PartialEq)]
pub struct L0Sketch {
    params: SketchParams,
    seed: u64,
    prime: u32,
    tables: Vec<u64>,
    /// Bucket-major: bucket `b`, level `j` sits at `b * levels + j`.
    counters: Vec<u32>,
}

impl L0Sketch {
    pub fn new(params: SketchParams, seed: u64) -> Self {
        let mut rng = derived_rng(seed, "l0-sketch", 0);
        let tables = (0..params.chars * 256).map(|_| rng.gen()).collect();
        let lo = 1u32 << (params.width - 1);
        let hi = if params.width >= 32 {
            u32::MAX
        } else {
            (1u32 << params.width) - 1
        };
        let prime = loop {
            let q = rng.gen_range(lo..=hi);
            if is_prime(q as u64) {
                break q;
            }
        };
        L0Sketch {
            params,
            seed,
            prime,
            tables,
            counters: vec![0; params.counters()],
        }
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn counters(&self) -> &[u32] {
        &self.counters
    }

    pub fn space_bits(&self) -> u64 {
        self.params.space_bits()
    }

    #[inline]
    fn hash(&self, index: u64) -> u64 {
        let mut h = 0;
        for (c, table) in self.tables.chunks_exact(256).enumerate() {
            h ^= table[((index >> (8 * c)) & 0xff) as usize];
        }
        h
    }

    #[inline]
    pub fn update(&mut self, index: usize, delta: i64) {
        let h = self.hash(index as u64);
        let levels = self.params.levels;
        let deepest = ((h as u32).trailing_zeros() as usize).min(levels - 1);
        let bucket = (((h >> 32) * self.params.buckets as u64) >> 32) as usize;
        let p = self.prime;
        let v = delta.rem_euclid(p as i64) as u32;
        let base = bucket * levels;
        for c in &mut self.counters[base..=base + deepest] {
            let s = *c + v;
            *c = if s >= p { s - p } else { s };
        }
    }

    pub fn extend(&mut self, updates: impl IntoIterator<Item = Update>) {
        for u in updates {
            self.update(u.index, u.delta);
        }
    }

    /// Adds another sketch built with the same parameters and seed; the
    /// result is the sketch of the concatenated streams.
    pub fn merge(&mut self, other: &L0Sketch) -> Result<()> {
        if self.params != other.params || self.seed != other.seed {
            return Err(Error::Parameter(
                "only sketches with the same parameters and seed merge".into(),
            ));
        }
        let p = self.prime;
        for (c, &o) in self.counters.iter_mut().zip(&other.counters) {
            let s = *c + o;
            *c = if s >= p { s - p } else { s };
        }
        Ok(())
    }

    /// Non-zero buckets per level.
    pub fn occupancy(&self) -> Vec<usize> {
        let levels = self.params.levels;
        let mut occ = vec![0; levels];
        for row in self.counters.chunks_exact(levels) {
            for (o, &c) in occ.iter_mut().zip(row) {
                *o += (c != 0) as usize;
            }
        }
        occ
    }

    pub fn estimate(&self) -> f64 {
        let occ = self.occupancy();
        if occ[0] == 0 {
            return 0.0;
        }
        let b = self.params.buckets as f64;
        let limit = LOAD_THRESHOLD * b;
        let level = occ.iter().position(|&t| t as f64 <= limit).unwrap_or(occ.len() - 1);
        let t = (occ[level] as f64).min(b - 1.0);
        (level as f64).exp2() * (1.0 - t / b).ln() / (1.0 - 1.0 / b).ln()
    }
}

/// Median of independent sketch copies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L0Estimate {
    pub estimate: f64,
    /// Combined footprint of all copies.
    pub space_bits: u64,
    pub copies: usize,
    pub params: SketchParams,
}

/// Number of copies whose median fails with probability at most `delta`.
pub fn median_copies(delta: f64) -> usize {
    (48.0 * (1.0 / delta).ln()).ceil().max(1.0) as usize
}

pub fn l0_estimate(stream: &TurnstileStream, epsilon: f64, delta: f64, seed: u64) -> Result<L0Estimate> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Parameter(format!("delta = {delta} must lie in (0, 1/2)")));
    }
    let params = SketchParams::for_stream(epsilon, stream)?;
    let copies = median_copies(delta);
    let mut estimates: Vec<f64> = (0..copies as u64)
        .into_par_iter()
        .map(|c| {
            let mut sketch = L0Sketch::new(params, derive_seed(seed, "l0-copy", c));
            sketch.extend(stream.updates().iter().copied());
            sketch.estimate()
        })
        .collect();
    estimates.sort_by(f64::total_cmp);
    let mid = copies / 2;
    let estimate = if copies % 2 == 1 {
        estimates[mid]
    } else {
        (estimates[mid - 1] + estimates[mid]) / 2.0
    };
    Ok(L0Estimate {
        estimate,
        space_bits: params.space_bits() * copies as u64,
        copies,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::l0stream::{exact_l0, random_strict_stream};
    use crate::seed::rng_from;

    #[test]
    fn parameters() {
        let p = SketchParams::new(0.1, 10_000, 50_000, 100).unwrap();
        assert_eq!((p.buckets, p.levels, p.chars), (200, 15, 2));
        assert_eq!(p.width, 4 + 5 + 4);
        assert_eq!(p.space_bits(), 200 * 15 * 13 + 13 + 2 * 256 * 64);
        assert_eq!(median_copies(1.0 / 3.0), 53);
    }

    #[test]
    fn empty_support_reads_zero() {
        let s = TurnstileStream::new(
            100,
            5,
            true,
            vec![Update { index: 7, delta: 5 }, Update { index: 7, delta: -5 }],
        )
        .unwrap();
        assert_eq!(l0_estimate(&s, 0.1, 0.25, 1).unwrap().estimate, 0.0);
    }

    #[test]
    fn split_streams_merge() {
        let s = random_strict_stream(1000, 4000, 20, 300, &mut rng_from(5)).unwrap();
        let params = SketchParams::for_stream(0.2, &s).unwrap();
        let (a, b) = s.updates().split_at(1700);
        let mut whole = L0Sketch::new(params, 9);
        whole.extend(s.updates().iter().copied());
        let mut left = L0Sketch::new(params, 9);
        left.extend(a.iter().copied());
        let mut right = L0Sketch::new(params, 9);
        right.extend(b.iter().copied());
        left.merge(&right).unwrap();
        assert_eq!(left, whole);
        assert!(left.merge(&L0Sketch::new(params, 10)).is_err());
    }

    #[test]
    fn estimate_is_close() {
        let s = random_strict_stream(10_000, 30_000, 100, 5000, &mut rng_from(8)).unwrap();
        let truth = exact_l0(&s) as f64;
        let e = l0_estimate(&s, 0.1, 0.1, 2).unwrap();
        assert!((e.estimate - truth).abs() <= 0.1 * truth, "{} vs {truth}", e.estimate);
    }
}
