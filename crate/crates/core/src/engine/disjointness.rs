use super::{run_protocol, Coins, CostReport, InputPartition, OneWayProtocol, PlayerView, RandomnessMode};
use crate::bits::Message;
use crate::error::{Error, Result};
use crate::seed::derived_rng;
use rand::Rng;
use serde::Serialize;

/// Promise instance of multiparty set disjointness, its answer under the
/// local-decision protocol, and what that protocol cost.
#[derive(Clone, Debug, Serialize)]
pub struct DisjointnessDemo {
    /// Indicator vectors over `[n / t]`, one per set.
    pub sets: Vec<Vec<bool>>,
    /// 0-based player holding two consecutive sets.
    pub double_holder: usize,
    pub output: u32,
    pub expected: u32,
    pub cost: CostReport,
    /// Charged bits plus the one-bit announcement of the final player.
    pub announced_total_bits: usize,
}

struct LocalDecision {
    players: usize,
}

fn intersect(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).any(|(&x, &y)| x && y)
}

impl LocalDecision {
    fn decide(&self, view: &PlayerView<'_, Vec<bool>>, incoming: &Message) -> bool {
        match view.inputs {
            [a, b] => intersect(a, b),
            _ => incoming.as_bits().is_some_and(|b| !b.is_empty() && b.get(0)),
        }
    }
}

impl OneWayProtocol<Vec<bool>> for LocalDecision {
    type Output = u32;

    fn players(&self) -> usize {
        self.players
    }

    fn randomness(&self) -> RandomnessMode {
        RandomnessMode::Deterministic
    }

    fn message(&self, view: &PlayerView<'_, Vec<bool>>, incoming: &Message, _: &Coins) -> Result<Message> {
        Ok(Message::uint(self.decide(view, incoming) as u64, 1))
    }

    fn output(&self, view: &PlayerView<'_, Vec<bool>>, incoming: &Message, _: &Coins) -> Result<u32> {
        Ok(self.decide(view, incoming) as u32)
    }

    fn max_message_bits(&self) -> Option<usize> {
        Some(1)
    }
}

/// Generates a promise instance on `t` sets over `[n / t]` (pairwise
/// disjoint, or all sharing exactly one element) and solves it with `t - 1`
/// players, one of whom holds two consecutive sets.
pub fn disjointness_demo(t: usize, n: usize, unique_intersection: bool, seed: u64) -> Result<DisjointnessDemo> {
    if t < 2 {
        return Err(Error::Parameter("at least two sets are needed".into()));
    }
    if n < t || !n.is_multiple_of(t) {
        return Err(Error::Parameter(format!(
            "universe size {n} must be a positive multiple of t = {t}"
        )));
    }
    let width = n / t;
    let mut rng = derived_rng(seed, "disjointness", 0);
    let mut sets = vec![vec![false; width]; t];
    let shared = unique_intersection.then(|| rng.gen_range(0..width));
    for e in 0..width {
        if Some(e) == shared {
            sets.iter_mut().for_each(|s| s[e] = true);
        } else {
            let owner = rng.gen_range(0..=t);
            if owner < t {
                sets[owner][e] = true;
            }
        }
    }
    let expected = promise_answer(&sets)?;
    let double_holder = rng.gen_range(0..t - 1);
    let cuts: Vec<usize> = (1..t - 1).map(|j| if j <= double_holder { j } else { j + 1 }).collect();
    let partition = InputPartition::contiguous(t, &cuts)?;
    let protocol = LocalDecision { players: t - 1 };
    let run = run_protocol(&protocol, &partition, &sets, seed)?;
    Ok(DisjointnessDemo {
        announced_total_bits: run.cost.total_bits + 1,
        sets,
        double_holder,
        output: run.output,
        expected,
        cost: run.cost,
    })
}

/// Checks the promise and returns 1 for a unique common element, 0 for
/// pairwise disjoint sets.
pub fn promise_answer(sets: &[Vec<bool>]) -> Result<u32> {
    let width = sets.first().map_or(0, Vec::len);
    let mut common = 0;
    for e in 0..width {
        let holders = sets.iter().filter(|s| s[e]).count();
        if holders == sets.len() {
            common += 1;
        } else if holders > 1 {
            return Err(Error::Precondition(format!(
                "element {e} is shared by some but not all sets"
            )));
        }
    }
    match common {
        0 => Ok(0),
        1 => Ok(1),
        c => Err(Error::Precondition(format!("{c} common elements; at most one allowed"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_cases_decide_correctly() {
        for seed in 0..50 {
            for t in 2..7 {
                let d = disjointness_demo(t, 4 * t, false, seed).unwrap();
                assert_eq!((d.output, d.expected), (0, 0));
                assert_eq!(d.cost.total_bits, t - 2);
                assert_eq!(d.announced_total_bits, t - 1);
                assert!(d.cost.per_message_bits.iter().all(|&b| b == 1));
                let d = disjointness_demo(t, 4 * t, true, seed).unwrap();
                assert_eq!((d.output, d.expected), (1, 1));
            }
        }
    }

    #[test]
    fn universe_must_divide() {
        assert!(disjointness_demo(3, 10, false, 0).is_err());
        assert!(disjointness_demo(1, 10, false, 0).is_err());
    }
}
