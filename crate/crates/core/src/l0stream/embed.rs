use super::stream::{TurnstileStream, Update};
use crate::error::{Error, Result};
use crate::reductions::{augindex_to_ghse, default_family};
use crate::seed::{derive_seed, derived_rng};
use crate::sumequal::{augindex_distribution_with, AugIndexConfig, AugIndexSample};
use serde::Serialize;

/// Layout of `t` gap layers of `n` coordinates in one stream. A layer-`i`
/// coordinate is repeated `100^(i-1)` times, so the top layer dominates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingPlan {
    pub t: usize,
    pub n: usize,
    pub epsilon: f64,
    pub frequencies: Vec<u64>,
    /// Number of repeated coordinates, `sum_i 100^(i-1) n`.
    pub total: u64,
}

impl EmbeddingPlan {
    pub fn new(t: usize, n: usize, epsilon: f64) -> Result<Self> {
        if t == 0 || n == 0 {
            return Err(Error::Parameter("need t >= 1 and n >= 1".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon = {epsilon} must lie in (0, 1)")));
        }
        let too_big = || Error::Refused(format!("t = {t}, n = {n} overflows the universe"));
        let frequencies: Vec<u64> = (0..t as u32)
            .map(|i| 100u64.checked_pow(i).ok_or_else(too_big))
            .collect::<Result<_>>()?;
        let total = frequencies
            .iter()
            .try_fold(0u64, |acc, &f| acc.checked_add(f.checked_mul(n as u64)?))
            .filter(|&s| s < u64::MAX / 4)
            .ok_or_else(too_big)?;
        let closed = (n as u128) * (100u128.pow(t as u32) - 1) / 99;
        assert_eq!(total as u128, closed);
        assert!(99 * total as u128 <= 100u128.pow(t as u32) * n as u128);
        Ok(EmbeddingPlan {
            t,
            n,
            epsilon,
            frequencies,
            total,
        })
    }

    /// Frequency of layer `i` (1-based).
    pub fn frequency(&self, i: usize) -> u64 {
        self.frequencies[i - 1]
    }

    /// Repeated coordinates in layers `1..=i`.
    pub fn total_upto(&self, i: usize) -> u64 {
        self.frequencies[..i].iter().sum::<u64>() * self.n as u64
    }

    /// Universe size: each repeated coordinate owns two elements.
    pub fn dimension(&self) -> usize {
        (2 * self.total) as usize
    }

    /// Every repeated coordinate contributes one element of support before
    /// any disagreement is counted, so `L0 = total + F'`.
    pub fn baseline(&self) -> u64 {
        self.total
    }

    /// Sketch accuracy that keeps the decoded advantage within `eps N`:
    /// `L0 <= 2N`, so a relative error of `eps / 2` is enough.
    pub fn sketch_epsilon(&self) -> f64 {
        self.epsilon / 2.0
    }

    pub fn updates(&self) -> usize {
        self.dimension()
    }
}

/// One gap layer: coordinate `c` counts as equal (`Z = +1`) exactly when the
/// two bits differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerPair {
    pub alice: Vec<u8>,
    pub bob: Vec<u8>,
}

impl LayerPair {
    pub fn new(alice: Vec<u8>, bob: Vec<u8>) -> Result<Self> {
        if alice.len() != bob.len() {
            return Err(Error::Parameter(format!(
                "layer vectors differ in length: {} and {}",
                alice.len(),
                bob.len()
            )));
        }
        if alice.iter().chain(&bob).any(|&b| b > 1) {
            return Err(Error::Parameter("layer vectors must be 0/1".into()));
        }
        Ok(LayerPair { alice, bob })
    }

    /// `f'`: number of differing coordinates.
    pub fn f_prime(&self) -> u64 {
        self.alice.iter().zip(&self.bob).filter(|(a, b)| a != b).count() as u64
    }

    /// `f = 2 f' - n`.
    pub fn f(&self) -> i64 {
        2 * self.f_prime() as i64 - self.alice.len() as i64
    }
}

/// Weighted sums over all layers, in integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingTotals {
    pub total: u64,
    /// `F = sum_i 100^(i-1) f_i`.
    pub f: i128,
    /// `F' = sum_i 100^(i-1) f'_i`.
    pub f_prime: u128,
}

impl EmbeddingTotals {
    /// Support of the embedded stream.
    pub fn l0(&self) -> u128 {
        self.total as u128 + self.f_prime
    }
}

fn check_layers(layers: &[LayerPair], plan: &EmbeddingPlan) -> Result<()> {
    if layers.len() != plan.t {
        return Err(Error::Parameter(format!(
            "expected {} layers, got {}",
            plan.t,
            layers.len()
        )));
    }
    if let Some(i) = layers
        .iter()
        .position(|l| l.alice.len() != plan.n || l.bob.len() != plan.n)
    {
        return Err(Error::Parameter(format!(
            "layer {} has {} coordinates, the plan needs {}",
            i + 1,
            layers[i].alice.len(),
            plan.n
        )));
    }
    Ok(())
}

pub fn embedding_totals(layers: &[LayerPair], plan: &EmbeddingPlan) -> Result<EmbeddingTotals> {
    check_layers(layers, plan)?;
    let (mut f, mut f_prime) = (0i128, 0u128);
    for (layer, &w) in layers.iter().zip(&plan.frequencies) {
        f += w as i128 * layer.f() as i128;
        f_prime += w as u128 * layer.f_prime() as u128;
    }
    Ok(EmbeddingTotals {
        total: plan.total,
        f,
        f_prime,
    })
}

/// Lazy update sequence of the embedding; see [`embed_ghse_layers`].
#[derive(Clone, Debug)]
pub struct EmbeddedUpdates<'a> {
    layers: &'a [LayerPair],
    plan: &'a EmbeddingPlan,
    bob: bool,
    done: bool,
    layer: usize,
    coord: usize,
    rep: u64,
    pair: u64,
}

impl Iterator for EmbeddedUpdates<'_> {
    type Item = Update;

    #[inline]
    fn next(&mut self) -> Option<Update> {
        loop {
            if self.done {
                return None;
            }
            if self.layer == self.plan.t {
                if self.bob {
                    self.done = true;
                    return None;
                }
                self.bob = true;
                (self.layer, self.coord, self.rep, self.pair) = (0, 0, 0, 0);
                continue;
            }
            if self.coord == self.plan.n {
                self.layer += 1;
                self.coord = 0;
                continue;
            }
            if self.rep == self.plan.frequencies[self.layer] {
                self.coord += 1;
                self.rep = 0;
                continue;
            }
            let l = &self.layers[self.layer];
            let bit = if self.bob {
                l.bob[self.coord]
            } else {
                l.alice[self.coord]
            };
            let index = (2 * self.pair + 1 + bit as u64) as usize;
            self.pair += 1;
            self.rep += 1;
            return Some(Update { index, delta: 1 });
        }
    }
}

pub fn embedded_updates<'a>(layers: &'a [LayerPair], plan: &'a EmbeddingPlan) -> Result<EmbeddedUpdates<'a>> {
    check_layers(layers, plan)?;
    Ok(EmbeddedUpdates {
        layers,
        plan,
        bob: false,
        done: false,
        layer: 0,
        coord: 0,
        rep: 0,
        pair: 0,
    })
}

/// Writes the layers into one strict stream.
///
/// Repeated coordinate `e` owns elements `2e+1` and `2e+2`. Alice inserts
/// `+1` on the element named by her bit, then Bob does the same with his.
/// Equal bits stack on one element and unequal bits touch both, so the
/// final support is `N + F'`. No update is negative.
pub fn embed_ghse_layers(layers: &[LayerPair], plan: &EmbeddingPlan) -> Result<TurnstileStream> {
    let updates: Vec<Update> = embedded_updates(layers, plan)?.collect();
    TurnstileStream::new(plan.dimension(), 1, true, updates)
}

/// Exact support of the embedded stream by replaying it into small counters.
pub fn embedded_exact_l0(layers: &[LayerPair], plan: &EmbeddingPlan) -> Result<u64> {
    let mut values = vec![0u8; plan.dimension()];
    let mut support = 0u64;
    for u in embedded_updates(layers, plan)? {
        let v = &mut values[u.index - 1];
        support += (*v == 0) as u64;
        *v += 1;
    }
    Ok(support)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TopLayerDecode {
    pub answer: u8,
    /// The advantage fell inside `[-eps N_i, eps N_i]`; `answer` is then its
    /// sign.
    pub ambiguous: bool,
    /// Estimated `sum_{j <= i} 100^(j-1) f_j`.
    pub advantage: f64,
}

/// Decodes layer `i` from an estimate of the embedded support, given the
/// exact `f_j` of every layer above it (`upper[0]` is `f_{i+1}`).
pub fn decode_top_layer(estimate: f64, plan: &EmbeddingPlan, upper: &[i64], i: usize) -> Result<TopLayerDecode> {
    if i == 0 || i > plan.t || upper.len() != plan.t - i {
        return Err(Error::Parameter(format!(
            "layer {i} of {} needs {} upper values, got {}",
            plan.t,
            plan.t.saturating_sub(i),
            upper.len()
        )));
    }
    let n = plan.n as i128;
    let upper_doubled: i128 = upper
        .iter()
        .zip(&plan.frequencies[i..])
        .map(|(&f, &w)| w as i128 * (n + f as i128))
        .sum();
    let f_prime = estimate - plan.baseline() as f64 - upper_doubled as f64 / 2.0;
    let below = plan.total_upto(i) as f64;
    let advantage = 2.0 * f_prime - below;
    let threshold = plan.epsilon * below;
    Ok(TopLayerDecode {
        answer: (advantage > 0.0) as u8,
        ambiguous: advantage.abs() <= threshold,
        advantage,
    })
}

/// A generated layer with the answer at its queried copy.
#[derive(Clone, Debug, Serialize)]
pub struct GeneratedLayer {
    pub pair: LayerPair,
    pub equal: bool,
}

/// Draws `t` independent layers from the augmented-index reduction with a
/// single copy on `n' = round(1/eps^2)` coordinates, each replicated
/// `n / n'` times.
pub fn generate_layers(plan: &EmbeddingPlan, k: usize, seed: u64) -> Result<Vec<GeneratedLayer>> {
    let n_prime = (1.0 / (plan.epsilon * plan.epsilon)).round() as usize;
    if n_prime == 0 || !plan.n.is_multiple_of(n_prime) {
        return Err(Error::Parameter(format!(
            "n = {} must be a multiple of 1/eps^2 = {n_prime}",
            plan.n
        )));
    }
    let factor = plan.n / n_prime;
    let magnitude = AugIndexSample::default_magnitude(k);
    (0..plan.t as u64)
        .map(|i| {
            let mut rng = derived_rng(seed, "layer-sample", i);
            let sample = augindex_distribution_with(k, 1, magnitude, &AugIndexConfig::default(), &mut rng)?;
            let family = default_family(&sample)?;
            let red = augindex_to_ghse(&sample, n_prime, &family, derive_seed(seed, "layer-hash", i))?;
            let widen = |v: &[u8]| v.iter().flat_map(|&b| std::iter::repeat_n(b, factor)).collect();
            Ok(GeneratedLayer {
                pair: LayerPair::new(widen(&red.alice), widen(&red.bob))?,
                equal: red.equal_at_query,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::l0stream::exact_l0;

    fn layer(alice: &[u8], bob: &[u8]) -> LayerPair {
        LayerPair::new(alice.to_vec(), bob.to_vec()).unwrap()
    }

    #[test]
    fn plan_sizes() {
        let p = EmbeddingPlan::new(2, 100, 0.1).unwrap();
        assert_eq!(p.total, 10_100);
        assert_eq!(p.dimension(), 20_200);
        assert_eq!(p.total_upto(1), 100);
        assert_eq!(EmbeddingPlan::new(3, 900, 1.0 / 30.0).unwrap().total, 9_090_900);
    }

    #[test]
    fn agreeing_layers_have_baseline_support() {
        let p = EmbeddingPlan::new(2, 3, 0.5).unwrap();
        let layers = vec![layer(&[0, 1, 1], &[0, 1, 1]), layer(&[1, 0, 0], &[1, 0, 0])];
        let t = embedding_totals(&layers, &p).unwrap();
        assert_eq!((t.f_prime, t.f), (0, -303));
        let s = embed_ghse_layers(&layers, &p).unwrap();
        assert_eq!(exact_l0(&s) as u64, p.baseline());
        assert_eq!(s.len(), p.updates());
    }

    #[test]
    fn support_tracks_disagreements() {
        let p = EmbeddingPlan::new(2, 3, 0.5).unwrap();
        let layers = vec![layer(&[0, 1, 1], &[1, 1, 0]), layer(&[1, 0, 0], &[1, 1, 0])];
        let t = embedding_totals(&layers, &p).unwrap();
        assert_eq!(t.f_prime, 2 + 100);
        assert_eq!(t.f, 2 * t.f_prime as i128 - p.total as i128);
        let s = embed_ghse_layers(&layers, &p).unwrap();
        assert_eq!(exact_l0(&s) as u128, t.l0());
        assert_eq!(embedded_exact_l0(&layers, &p).unwrap() as u128, t.l0());
        assert!(embed_ghse_layers(&layers[..1], &p).is_err());
    }

    #[test]
    fn exact_decoding() {
        let p = EmbeddingPlan::new(2, 4, 0.25).unwrap();
        let layers = vec![layer(&[0, 0, 0, 0], &[0, 0, 0, 1]), layer(&[1, 1, 1, 0], &[0, 0, 0, 0])];
        let l0 = embedded_exact_l0(&layers, &p).unwrap() as f64;
        let top = decode_top_layer(l0, &p, &[], 2).unwrap();
        assert_eq!(top.advantage, 100.0 * 2.0 - 2.0);
        assert_eq!((top.answer, top.ambiguous), (1, false));
        let low = decode_top_layer(l0, &p, &[layers[1].f()], 1).unwrap();
        assert_eq!(low.advantage, -2.0);
        assert_eq!((low.answer, low.ambiguous), (0, false));
        assert!(decode_top_layer(l0, &p, &[], 1).is_err());
    }

    #[test]
    fn generated_layers_have_the_gap() {
        let p = EmbeddingPlan::new(2, 1800, 1.0 / 30.0).unwrap();
        for seed in 0..6 {
            for l in generate_layers(&p, 16, seed).unwrap() {
                assert_eq!(l.pair.alice.len(), 1800);
                if l.equal {
                    assert_eq!(l.pair.f(), 600);
                } else {
                    assert!(l.pair.f() < -300, "{}", l.pair.f());
                }
            }
        }
        assert!(generate_layers(&EmbeddingPlan::new(1, 1000, 1.0 / 30.0).unwrap(), 16, 0).is_err());
        assert!(generate_layers(&EmbeddingPlan::new(1, 100, 0.1).unwrap(), 16, 0).is_err());
    }
}
