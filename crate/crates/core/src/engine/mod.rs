//! One-way multiparty protocols in the number-in-hand model.
//!
//! Player `j` sees its own block of inputs and the message of player
//! `j - 1`, and sends one message to player `j + 1`. The last player
//! announces the output, which is not charged.

mod disjointness;
mod measure;
mod rowclass;

pub use disjointness::{disjointness_demo, DisjointnessDemo};
pub use measure::{measure_error, ErrorKind, ErrorSource, MeasureOptions};
pub use rowclass::RowClassProtocol;

use crate::bits::Message;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Which random resources a protocol may touch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomnessMode {
    Deterministic,
    PrivateCoins,
    /// Common reference string; private coins are available as well.
    Crs,
}

/// The random resources handed to one player in one run.
#[derive(Clone, Copy, Debug)]
pub struct Coins {
    mode: RandomnessMode,
    crs: u64,
    private: u64,
    player: usize,
}

impl Coins {
    pub fn new(mode: RandomnessMode, run_seed: u64, player: usize) -> Self {
        Coins {
            mode,
            crs: derive_seed(run_seed, "crs", 0),
            private: derive_seed(run_seed, "private", player as u64),
            player,
        }
    }

    pub fn mode(&self) -> RandomnessMode {
        self.mode
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn crs_seed(&self) -> Result<u64> {
        if self.mode == RandomnessMode::Crs {
            Ok(self.crs)
        } else {
            Err(Error::EngineViolation(format!(
                "player {} read the common reference string in {:?} mode",
                self.player, self.mode
            )))
        }
    }

    /// A fresh reader over the shared string; every player sees the same bits.
    pub fn crs(&self) -> Result<ChaCha8Rng> {
        self.crs_seed().map(rng_from)
    }

    pub fn private_seed(&self) -> Result<u64> {
        if self.mode == RandomnessMode::Deterministic {
            Err(Error::EngineViolation(format!(
                "player {} used private coins in a deterministic protocol",
                self.player
            )))
        } else {
            Ok(self.private)
        }
    }

    pub fn private(&self) -> Result<ChaCha8Rng> {
        self.private_seed().map(rng_from)
    }

    /// Independent coins for a labelled sub-protocol, e.g. one copy of an
    /// amplified protocol. Forking keeps the shared string shared.
    pub fn fork(&self, label: &str, index: u64) -> Coins {
        Coins {
            mode: self.mode,
            crs: derive_seed(self.crs, label, index),
            private: derive_seed(self.private, label, index),
            player: self.player,
        }
    }

    /// Same coins under a narrower mode.
    pub fn restrict(&self, mode: RandomnessMode) -> Coins {
        Coins {
            mode: mode.min(self.mode),
            ..*self
        }
    }
}

/// What one player sees of the input.
#[derive(Clone, Copy, Debug)]
pub struct PlayerView<'a, X> {
    /// 0-based player index.
    pub player: usize,
    pub players: usize,
    /// 0-based input positions held by this player, in increasing order.
    pub positions: &'a [usize],
    pub inputs: &'a [X],
}

impl<X> PlayerView<'_, X> {
    pub fn is_last(&self) -> bool {
        self.player + 1 == self.players
    }
}

/// A one-way protocol for a fixed number of players.
pub trait OneWayProtocol<X>: Send + Sync {
    type Output: Clone + PartialEq + fmt::Debug + Send;

    fn players(&self) -> usize;

    fn randomness(&self) -> RandomnessMode;

    /// Message of a non-final player. The first player receives an empty
    /// message.
    fn message(&self, view: &PlayerView<'_, X>, incoming: &Message, coins: &Coins) -> Result<Message>;

    /// Output of the final player.
    fn output(&self, view: &PlayerView<'_, X>, incoming: &Message, coins: &Coins) -> Result<Self::Output>;

    /// Static bound on the length of every message, when one is known.
    fn max_message_bits(&self) -> Option<usize> {
        None
    }

    /// Whether [`OneWayProtocol::message`] would return `expected`.
    /// Protocols with framed messages may stop at the first differing frame.
    fn message_matches(
        &self,
        view: &PlayerView<'_, X>,
        incoming: &Message,
        coins: &Coins,
        expected: &Message,
    ) -> Result<bool> {
        Ok(self.message(view, incoming, coins)? == *expected)
    }
}

macro_rules! forward_protocol {
    ($($ty:ty),*) => {$(
        impl<X, P: OneWayProtocol<X> + ?Sized> OneWayProtocol<X> for $ty {
            type Output = P::Output;
            fn players(&self) -> usize { (**self).players() }
            fn randomness(&self) -> RandomnessMode { (**self).randomness() }
            fn message(&self, view: &PlayerView<'_, X>, incoming: &Message, coins: &Coins) -> Result<Message> {
                (**self).message(view, incoming, coins)
            }
            fn output(&self, view: &PlayerView<'_, X>, incoming: &Message, coins: &Coins) -> Result<Self::Output> {
                (**self).output(view, incoming, coins)
            }
            fn max_message_bits(&self) -> Option<usize> { (**self).max_message_bits() }
            fn message_matches(
                &self,
                view: &PlayerView<'_, X>,
                incoming: &Message,
                coins: &Coins,
                expected: &Message,
            ) -> Result<bool> {
                (**self).message_matches(view, incoming, coins, expected)
            }
        }
    )*};
}

forward_protocol!(Box<P>, Arc<P>, &P);

/// Assignment of input positions to players.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputPartition {
    k: usize,
    blocks: Vec<Vec<usize>>,
}

impl InputPartition {
    /// Contiguous blocks cut at `cuts` (0-based, non-decreasing, at most
    /// `k`); empty blocks are allowed. `t - 1` cuts give `t` players.
    pub fn contiguous(k: usize, cuts: &[usize]) -> Result<Self> {
        if cuts.windows(2).any(|w| w[0] > w[1]) || cuts.iter().any(|&c| c > k) {
            return Err(Error::Config(format!(
                "cuts {cuts:?} must be non-decreasing and at most {k}"
            )));
        }
        let mut bounds = Vec::with_capacity(cuts.len() + 2);
        bounds.push(0);
        bounds.extend_from_slice(cuts);
        bounds.push(k);
        Ok(InputPartition {
            k,
            blocks: bounds.windows(2).map(|w| (w[0]..w[1]).collect()).collect(),
        })
    }

    pub fn two_way(k: usize, cut: usize) -> Result<Self> {
        Self::contiguous(k, &[cut])
    }

    pub fn singletons(k: usize) -> Self {
        InputPartition {
            k,
            blocks: (0..k).map(|i| vec![i]).collect(),
        }
    }

    /// Arbitrary blocks; together they must cover `0..k` exactly once.
    pub fn from_blocks(k: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; k];
        for b in blocks.iter_mut() {
            b.sort_unstable();
            for &i in b.iter() {
                if i >= k || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Config(format!("position {i} is out of range or assigned twice")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Config(format!("position {i} is not assigned")));
        }
        if blocks.is_empty() {
            return Err(Error::Config("a partition needs at least one player".into()));
        }
        Ok(InputPartition { k, blocks })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn players(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, player: usize) -> &[usize] {
        &self.blocks[player]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Cut positions when every block is a contiguous run in player order.
    pub fn cuts(&self) -> Option<Vec<usize>> {
        let mut next = 0;
        let mut cuts = Vec::new();
        for (j, b) in self.blocks.iter().enumerate() {
            if b.iter().enumerate().any(|(o, &i)| i != next + o) {
                return None;
            }
            next += b.len();
            if j + 1 < self.blocks.len() {
                cuts.push(next);
            }
        }
        Some(cuts)
    }
}

/// Communication cost of one or more runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    /// Bits sent by each non-final player; a maximum over runs when several
    /// runs are aggregated.
    pub per_message_bits: Vec<usize>,
    pub max_message_bits: usize,
    pub total_bits: usize,
    pub declared_max_message_bits: Option<usize>,
    pub error_estimate: Option<f64>,
    pub mean_error: Option<f64>,
    pub error_kind: Option<ErrorKind>,
}

impl CostReport {
    pub fn from_lengths(per_message_bits: Vec<usize>, declared: Option<usize>) -> Self {
        CostReport {
            max_message_bits: per_message_bits.iter().copied().max().unwrap_or(0),
            total_bits: per_message_bits.iter().sum(),
            per_message_bits,
            declared_max_message_bits: declared,
            error_estimate: None,
            mean_error: None,
            error_kind: None,
        }
    }
}

/// Result of one execution.
#[derive(Clone, Debug)]
pub struct Run<O> {
    pub output: O,
    pub transcript: Vec<Message>,
    pub cost: CostReport,
}

/// Executes `protocol` once. Player coins are derived from `seed`.
pub fn run_protocol<X, P>(protocol: &P, partition: &InputPartition, inputs: &[X], seed: u64) -> Result<Run<P::Output>>
where
    X: Clone,
    P: OneWayProtocol<X> + ?Sized,
{
    let t = protocol.players();
    if partition.players() != t {
        return Err(Error::Config(format!(
            "protocol has {t} players but the partition has {}",
            partition.players()
        )));
    }
    if inputs.len() != partition.k() {
        return Err(Error::Config(format!(
            "expected {} inputs, got {}",
            partition.k(),
            inputs.len()
        )));
    }
    let declared = protocol.max_message_bits();
    let mode = protocol.randomness();
    let mut transcript = Vec::with_capacity(t.saturating_sub(1));
    let mut incoming = Message::empty();
    let mut block_inputs: Vec<X> = Vec::new();
    for player in 0..t {
        let positions = partition.block(player);
        block_inputs.clear();
        block_inputs.extend(positions.iter().map(|&i| inputs[i].clone()));
        let view = PlayerView {
            player,
            players: t,
            positions,
            inputs: &block_inputs,
        };
        let coins = Coins::new(mode, seed, player);
        if player + 1 == t {
            let output = protocol.output(&view, &incoming, &coins)?;
            let lengths = transcript.iter().map(Message::bit_len).collect();
            return Ok(Run {
                output,
                transcript,
                cost: CostReport::from_lengths(lengths, declared),
            });
        }
        let msg = protocol.message(&view, &incoming, &coins)?;
        if let Some(bound) = declared {
            if msg.bit_len() > bound {
                return Err(Error::EngineViolation(format!(
                    "player {player} sent {} bits, above the declared bound {bound}",
                    msg.bit_len()
                )));
            }
        }
        transcript.push(msg.clone());
        incoming = msg;
    }
    Err(Error::Config("a protocol needs at least one player".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Echo;

    impl OneWayProtocol<u32> for Echo {
        type Output = u32;
        fn players(&self) -> usize {
            3
        }
        fn randomness(&self) -> RandomnessMode {
            RandomnessMode::Deterministic
        }
        fn message(&self, view: &PlayerView<'_, u32>, _: &Message, coins: &Coins) -> Result<Message> {
            if view.inputs.first() == Some(&9) {
                coins.private()?;
            }
            Ok(Message::uint(view.inputs.len() as u64, 4))
        }
        fn output(&self, view: &PlayerView<'_, u32>, incoming: &Message, _: &Coins) -> Result<u32> {
            Ok(view.inputs.len() as u32 + incoming.bit_len() as u32)
        }
        fn max_message_bits(&self) -> Option<usize> {
            Some(4)
        }
    }

    #[test]
    fn empty_blocks_are_allowed() {
        let p = InputPartition::contiguous(4, &[0, 4]).unwrap();
        assert_eq!(p.block(0), &[] as &[usize]);
        assert_eq!(p.block(1), &[0, 1, 2, 3]);
        assert_eq!(p.cuts(), Some(vec![0, 4]));
        let run = run_protocol(&Echo, &p, &[1, 2, 3, 4], 0).unwrap();
        assert_eq!(run.cost.per_message_bits, vec![4, 4]);
        assert_eq!(run.output, 4);
    }

    #[test]
    fn coins_in_deterministic_mode_are_a_violation() {
        let p = InputPartition::contiguous(3, &[1, 2]).unwrap();
        let err = run_protocol(&Echo, &p, &[9, 0, 0], 0).unwrap_err();
        assert_eq!(err.kind(), "engine-violation");
    }

    #[test]
    fn partition_validation() {
        assert!(InputPartition::contiguous(3, &[2, 1]).is_err());
        assert!(InputPartition::from_blocks(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(InputPartition::from_blocks(3, vec![vec![0], vec![2]]).is_err());
        let p = InputPartition::from_blocks(3, vec![vec![2], vec![0, 1]]).unwrap();
        assert_eq!(p.cuts(), None);
    }

    #[test]
    fn crs_is_shared_and_private_coins_are_not() {
        let a = Coins::new(RandomnessMode::Crs, 7, 0);
        let b = Coins::new(RandomnessMode::Crs, 7, 1);
        assert_eq!(a.crs_seed().unwrap(), b.crs_seed().unwrap());
        assert_ne!(a.private_seed().unwrap(), b.private_seed().unwrap());
        assert_eq!(
            a.fork("copy", 3).crs_seed().unwrap(),
            b.fork("copy", 3).crs_seed().unwrap()
        );
        let p = Coins::new(RandomnessMode::PrivateCoins, 7, 0);
        assert!(p.crs_seed().is_err());
    }
}
