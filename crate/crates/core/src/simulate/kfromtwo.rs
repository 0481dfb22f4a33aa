use crate::bits::{ceil_log2, Message};
use crate::distribution::{InputDistribution, ProductDistribution};
use crate::engine::{Coins, OneWayProtocol, PlayerView, RandomnessMode};
use crate::error::{Error, Result};
use crate::function::{row_classes, Domain, FunctionTable, RowClasses};
use rand::Rng;
use serde::Serialize;
use std::sync::atomic::{AtomicU64, Ordering};

/// Counters collected while the simulation runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SimulationStats {
    pub reconstructions: u64,
    /// Reconstructions where consistent prefixes fell into several row
    /// classes, so the quality filter had to be evaluated.
    pub filtered: u64,
    /// Filter evaluations in which no class met the threshold and the
    /// unfiltered posterior was used.
    pub fallbacks: u64,
}

#[derive(Default)]
struct Counters {
    reconstructions: AtomicU64,
    filtered: AtomicU64,
    fallbacks: AtomicU64,
}

/// A `k`-player protocol for `f` built from one two-party protocol `pi2`
/// that works for every cut.
///
/// Player `i` receives `pi2`'s message for the first `i` inputs, samples a
/// prefix from the input distribution conditioned on producing that
/// message, keeps only prefixes whose row class `pi2` answers correctly
/// with probability at least `1 - delta / (4k)` on the rest of the input,
/// appends its own input and sends `pi2`'s message for the longer prefix
/// together with the prefix length. The last player finishes as Bob.
pub struct KFromTwo<P> {
    pi2: P,
    k: usize,
    delta: f64,
    threshold: f64,
    alphabets: Vec<u32>,
    mu: ProductDistribution,
    classes: Vec<RowClasses>,
    positions: Vec<usize>,
    index_bits: u32,
    counters: Counters,
}

/// Refuses non-product input distributions and private-coin `pi2`; the
/// latter would let every player see independent Alice coins.
pub fn k_from_two_simulation<P>(
    pi2: P,
    f: &FunctionTable,
    mu: &dyn InputDistribution,
    delta: f64,
    cap: u64,
) -> Result<KFromTwo<P>>
where
    P: OneWayProtocol<u32, Output = u32>,
{
    let k = f.arity();
    if k < 2 {
        return Err(Error::Parameter("need at least two players".into()));
    }
    if pi2.players() != 2 {
        return Err(Error::Config("the building block must be a two-party protocol".into()));
    }
    if pi2.randomness() == RandomnessMode::PrivateCoins {
        return Err(Error::Refused(
            "the two-party protocol uses private coins; use a deterministic or shared-randomness protocol".into(),
        ));
    }
    let mu = mu
        .as_product()
        .ok_or_else(|| Error::Refused("the input distribution is not a product distribution".into()))?
        .clone();
    if InputDistribution::alphabets(&mu) != f.alphabets() {
        return Err(Error::Config(
            "distribution and function disagree on the alphabets".into(),
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta = {delta} must lie in (0, 1)")));
    }
    let classes = (1..k).map(|c| row_classes(f, c, cap)).collect::<Result<Vec<_>>>()?;
    Ok(KFromTwo {
        pi2,
        k,
        delta,
        threshold: 1.0 - delta / (4.0 * k as f64),
        alphabets: f.alphabets().to_vec(),
        mu,
        classes,
        positions: (0..k).collect(),
        index_bits: ceil_log2(k as u64),
        counters: Counters::default(),
    })
}

impl<P: OneWayProtocol<u32, Output = u32>> KFromTwo<P> {
    pub fn stats(&self) -> SimulationStats {
        SimulationStats {
            reconstructions: self.counters.reconstructions.load(Ordering::Relaxed),
            filtered: self.counters.filtered.load(Ordering::Relaxed),
            fallbacks: self.counters.fallbacks.load(Ordering::Relaxed),
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn index_bits(&self) -> u32 {
        self.index_bits
    }

    pub fn inner(&self) -> &P {
        &self.pi2
    }

    fn alice(&self, prefix: &[u32], coins: &Coins) -> Result<Message> {
        let view = PlayerView {
            player: 0,
            players: 2,
            positions: &self.positions[..prefix.len()],
            inputs: prefix,
        };
        self.pi2.message(&view, &Message::empty(), coins)
    }

    fn alice_matches(&self, prefix: &[u32], coins: &Coins, expected: &Message) -> Result<bool> {
        let view = PlayerView {
            player: 0,
            players: 2,
            positions: &self.positions[..prefix.len()],
            inputs: prefix,
        };
        self.pi2.message_matches(&view, &Message::empty(), coins, expected)
    }

    fn bob(&self, suffix: &[u32], incoming: &Message, coins: &Coins) -> Result<u32> {
        let view = PlayerView {
            player: 1,
            players: 2,
            positions: &self.positions[self.k - suffix.len()..],
            inputs: suffix,
        };
        self.pi2.output(&view, incoming, coins)
    }

    fn parse<'m>(&self, incoming: &'m Message, expected_cut: usize) -> Result<&'m Message> {
        match incoming.frames() {
            Some([inner, Message::Bits(idx)]) => {
                let cut = idx
                    .reader()
                    .read_uint(self.index_bits)
                    .ok_or_else(|| Error::Inconsistent("malformed index".into()))? as usize
                    + 1;
                if cut != expected_cut {
                    return Err(Error::Inconsistent(format!(
                        "message summarizes {cut} inputs, expected {expected_cut}"
                    )));
                }
                Ok(inner)
            }
            _ => Err(Error::Inconsistent("expected a message and an index".into())),
        }
    }

    fn check_view(&self, view: &PlayerView<'_, u32>) -> Result<u32> {
        match (view.positions, view.inputs) {
            ([p], [x]) if *p == view.player && view.players == self.k => Ok(*x),
            _ => Err(Error::Config(
                "the simulation expects player i to hold exactly input i".into(),
            )),
        }
    }

    /// Samples a prefix of length `cut` consistent with `message`.
    fn reconstruct(&self, cut: usize, message: &Message, shared: &Coins, own: &Coins) -> Result<Vec<u32>> {
        self.counters.reconstructions.fetch_add(1, Ordering::Relaxed);
        let domain = Domain::new(self.alphabets[..cut].to_vec());
        let classes = &self.classes[cut - 1];
        let mut consistent: Vec<(u64, f64, u32)> = Vec::new();
        let mut prefix = vec![0u32; cut];
        let mut idx = 0u64;
        loop {
            if self.alice_matches(&prefix, shared, message)? {
                consistent.push((idx, self.mu.block_prob(0, &prefix), classes.class_of[idx as usize]));
            }
            idx += 1;
            if !domain.advance(&mut prefix) {
                break;
            }
        }
        if consistent.is_empty() {
            return Err(Error::Inconsistent(format!(
                "no prefix of length {cut} matches the message"
            )));
        }
        let first_class = consistent[0].2;
        let mut candidates: Vec<(u64, f64)> = if consistent.iter().all(|c| c.2 == first_class) {
            // A single class passes or fails the filter as a whole, and a
            // failing class falls back to itself, so no filter is needed.
            consistent.iter().map(|c| (c.0, c.1)).collect()
        } else {
            self.counters.filtered.fetch_add(1, Ordering::Relaxed);
            let good = self.good_classes(cut, message, &consistent, shared)?;
            let kept: Vec<(u64, f64)> = consistent
                .iter()
                .filter(|c| good.contains(&c.2))
                .map(|c| (c.0, c.1))
                .collect();
            if kept.is_empty() {
                self.counters.fallbacks.fetch_add(1, Ordering::Relaxed);
                consistent.iter().map(|c| (c.0, c.1)).collect()
            } else {
                kept
            }
        };
        let total: f64 = candidates.iter().map(|c| c.1).sum();
        if !(total > 0.0) {
            candidates.iter_mut().for_each(|c| c.1 = 1.0);
        }
        let total: f64 = candidates.iter().map(|c| c.1).sum();
        let mut u = own.private()?.gen::<f64>() * total;
        let chosen = candidates
            .iter()
            .find(|c| {
                u -= c.1;
                u < 0.0
            })
            .unwrap_or(candidates.last().expect("non-empty"))
            .0;
        Ok(domain.decode(chosen))
    }

    /// Row classes among `consistent` that `pi2` answers correctly with
    /// probability at least the threshold over the remaining inputs.
    fn good_classes(
        &self,
        cut: usize,
        message: &Message,
        consistent: &[(u64, f64, u32)],
        coins: &Coins,
    ) -> Result<Vec<u32>> {
        let mut present: Vec<u32> = consistent.iter().map(|c| c.2).collect();
        present.sort_unstable();
        present.dedup();
        let rows = &self.classes[cut - 1].rows;
        let suffix_domain = Domain::new(self.alphabets[cut..].to_vec());
        let mut quality = vec![0.0; present.len()];
        let mut suffix = vec![0u32; self.k - cut];
        let mut s_idx = 0usize;
        loop {
            let answer = self.bob(&suffix, message, coins)?;
            let w = self.mu.block_prob(cut, &suffix);
            for (q, &c) in quality.iter_mut().zip(&present) {
                if rows[c as usize][s_idx] == answer {
                    *q += w;
                }
            }
            s_idx += 1;
            if !suffix_domain.advance(&mut suffix) {
                break;
            }
        }
        Ok(present
            .into_iter()
            .zip(quality)
            .filter(|(_, q)| *q >= self.threshold)
            .map(|(c, _)| c)
            .collect())
    }
}

impl<P: OneWayProtocol<u32, Output = u32>> OneWayProtocol<u32> for KFromTwo<P> {
    type Output = u32;

    fn players(&self) -> usize {
        self.k
    }

    fn randomness(&self) -> RandomnessMode {
        RandomnessMode::Crs
    }

    fn message(&self, view: &PlayerView<'_, u32>, incoming: &Message, coins: &Coins) -> Result<Message> {
        let x = self.check_view(view)?;
        let i = view.player;
        let shared = coins.restrict(self.pi2.randomness()).fork("pi2", 0);
        let mut prefix = if i == 0 {
            Vec::with_capacity(1)
        } else {
            let inner = self.parse(incoming, i)?;
            self.reconstruct(i, inner, &shared, &coins.fork("sample", 0))?
        };
        prefix.push(x);
        let m = self.alice(&prefix, &shared)?;
        Ok(Message::Frames(vec![m, Message::uint(i as u64, self.index_bits)]))
    }

    fn output(&self, view: &PlayerView<'_, u32>, incoming: &Message, coins: &Coins) -> Result<u32> {
        let x = self.check_view(view)?;
        let shared = coins.restrict(self.pi2.randomness()).fork("pi2", 0);
        let inner = self.parse(incoming, self.k - 1)?;
        self.bob(&[x], inner, &shared)
    }

    fn max_message_bits(&self) -> Option<usize> {
        self.pi2.max_message_bits().map(|b| b + self.index_bits as usize)
    }
}
