use crate::bits::{ceil_log2, Message};
use crate::engine::{Coins, OneWayProtocol, PlayerView, RandomnessMode};
use crate::error::{Error, Result};
use crate::function::{Domain, FunctionTable, DEFAULT_ENUM_CAP};
use std::collections::HashMap;

pub type TwoPartyProtocol = Box<dyn OneWayProtocol<u32, Output = u32>>;

#[derive(Clone, Debug)]
pub struct StreamOptions {
    /// Leave the position counter out of the state; the driver supplies the
    /// position of every item instead.
    pub drop_index: bool,
    pub enum_cap: u64,
}

impl Default for StreamOptions {
    fn default() -> Self {
        StreamOptions {
            drop_index: false,
            enum_cap: DEFAULT_ENUM_CAP,
        }
    }
}

/// State of the streaming algorithm: nothing read yet, or the two-party
/// message for the prefix read so far together with its length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutomatonState {
    Fresh,
    Summary { message: Message, consumed: usize },
}

/// Streaming algorithm built from deterministic one-way two-party protocols,
/// one per cut.
///
/// On item `i + 1` it recovers some prefix consistent with the stored
/// message (the first one in enumeration order), appends the new item and
/// stores the cut-`(i + 1)` message of that extended prefix.
pub struct ReconstructingAutomaton {
    arity: usize,
    alphabets: Vec<u32>,
    protocols: Vec<TwoPartyProtocol>,
    prefixes: Vec<HashMap<Message, Vec<u32>>>,
    max_message_bits: usize,
    index_bits: u32,
    drop_index: bool,
}

impl ReconstructingAutomaton {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Bits of state: the largest message plus the position counter.
    pub fn memory_bits(&self) -> usize {
        self.max_message_bits + if self.drop_index { 0 } else { self.index_bits as usize }
    }

    pub fn max_message_bits(&self) -> usize {
        self.max_message_bits
    }

    pub fn index_bits(&self) -> u32 {
        if self.drop_index {
            0
        } else {
            self.index_bits
        }
    }

    pub fn state_bits(&self, state: &AutomatonState) -> usize {
        match state {
            AutomatonState::Fresh => 0,
            AutomatonState::Summary { message, .. } => message.bit_len() + self.index_bits() as usize,
        }
    }

    fn alice(&self, cut: usize, prefix: &[u32], positions: &[usize]) -> Result<Message> {
        let view = PlayerView {
            player: 0,
            players: 2,
            positions: &positions[..cut],
            inputs: prefix,
        };
        let coins = Coins::new(RandomnessMode::Deterministic, 0, 0);
        self.protocols[cut - 1].message(&view, &Message::empty(), &coins)
    }

    /// Reads item number `position` (0-based).
    pub fn step(&self, state: &AutomatonState, position: usize, item: u32) -> Result<AutomatonState> {
        if position >= self.arity || item >= self.alphabets[position] {
            return Err(Error::Config(format!(
                "item {item} at position {position} is outside the domain"
            )));
        }
        let positions: Vec<usize> = (0..self.arity).collect();
        let mut prefix = match state {
            AutomatonState::Fresh if position == 0 => Vec::with_capacity(1),
            AutomatonState::Fresh => {
                return Err(Error::Inconsistent(format!("fresh state at position {position}")));
            }
            AutomatonState::Summary { message, consumed } => {
                if !self.drop_index && *consumed != position {
                    return Err(Error::Inconsistent(format!(
                        "state summarizes {consumed} items but item {position} arrived"
                    )));
                }
                if position == 0 {
                    return Err(Error::Inconsistent("summary state at position 0".into()));
                }
                self.prefixes[position - 1].get(message).cloned().ok_or_else(|| {
                    Error::Inconsistent(format!("no prefix of length {position} produces the stored message"))
                })?
            }
        };
        prefix.push(item);
        let message = self.alice(position + 1, &prefix, &positions)?;
        let next = AutomatonState::Summary {
            message,
            consumed: position + 1,
        };
        let bits = self.state_bits(&next);
        if bits > self.memory_bits() {
            return Err(Error::EngineViolation(format!(
                "state of {bits} bits exceeds the memory bound {}",
                self.memory_bits()
            )));
        }
        Ok(next)
    }

    pub fn finish(&self, state: &AutomatonState) -> Result<u32> {
        let message = match state {
            AutomatonState::Summary { message, consumed } if self.drop_index || *consumed == self.arity => message,
            _ => return Err(Error::Inconsistent("stream ended early".into())),
        };
        let view = PlayerView {
            player: 1,
            players: 2,
            positions: &[],
            inputs: &[],
        };
        let coins = Coins::new(RandomnessMode::Deterministic, 0, 1);
        self.protocols[self.arity - 1].output(&view, message, &coins)
    }

    pub fn run(&self, items: &[u32]) -> Result<u32> {
        if items.len() != self.arity {
            return Err(Error::Config(format!(
                "expected {} items, got {}",
                self.arity,
                items.len()
            )));
        }
        let mut state = AutomatonState::Fresh;
        for (i, &x) in items.iter().enumerate() {
            state = self.step(&state, i, x)?;
        }
        self.finish(&state)
    }
}

/// Builds the streaming algorithm from `protocols[c - 1]`, the two-party
/// protocol for cut `c`, for `c = 1, ..., m`.
pub fn det_stream_from_two_party(
    f: &FunctionTable,
    protocols: Vec<TwoPartyProtocol>,
    options: &StreamOptions,
) -> Result<ReconstructingAutomaton> {
    let m = f.arity();
    if protocols.len() != m {
        return Err(Error::Config(format!(
            "need {m} protocols, one per cut, got {}",
            protocols.len()
        )));
    }
    if let Some(c) = protocols
        .iter()
        .position(|p| p.players() != 2 || p.randomness() != RandomnessMode::Deterministic)
    {
        return Err(Error::Config(format!(
            "protocol for cut {} must be a deterministic two-party protocol",
            c + 1
        )));
    }
    let mut visited = 0u64;
    let mut automaton = ReconstructingAutomaton {
        arity: m,
        alphabets: f.alphabets().to_vec(),
        protocols,
        prefixes: Vec::with_capacity(m.saturating_sub(1)),
        max_message_bits: 0,
        index_bits: ceil_log2(m as u64),
        drop_index: options.drop_index,
    };
    let positions: Vec<usize> = (0..m).collect();
    for cut in 1..=m {
        let domain = Domain::new(f.alphabets()[..cut].to_vec());
        visited = visited.saturating_add(domain.size().unwrap_or(u64::MAX));
        if visited > options.enum_cap {
            return Err(Error::Refused(format!(
                "enumerating prefixes up to length {cut} exceeds the cap {}",
                options.enum_cap
            )));
        }
        let mut map = HashMap::new();
        for prefix in domain.iter() {
            let msg = automaton.alice(cut, &prefix, &positions)?;
            automaton.max_message_bits = automaton.max_message_bits.max(msg.bit_len());
            if cut < m {
                map.entry(msg).or_insert(prefix);
            }
        }
        if cut < m {
            automaton.prefixes.push(map);
        }
    }
    Ok(automaton)
}

/// A multiparty protocol in which every player runs the automaton on its
/// block and forwards the state.
pub struct AutomatonProtocol<'a> {
    automaton: &'a ReconstructingAutomaton,
    players: usize,
}

impl<'a> AutomatonProtocol<'a> {
    pub fn new(automaton: &'a ReconstructingAutomaton, players: usize) -> Self {
        AutomatonProtocol { automaton, players }
    }

    fn decode(&self, incoming: &Message, next_position: usize) -> Result<AutomatonState> {
        match incoming {
            Message::Bits(b) if b.is_empty() => Ok(AutomatonState::Fresh),
            Message::Frames(parts) => match parts.as_slice() {
                [message, Message::Bits(idx)] if !self.automaton.drop_index => {
                    let consumed = idx
                        .reader()
                        .read_uint(self.automaton.index_bits)
                        .ok_or_else(|| Error::Inconsistent("malformed index".into()))?
                        as usize
                        + 1;
                    Ok(AutomatonState::Summary {
                        message: message.clone(),
                        consumed,
                    })
                }
                [message] if self.automaton.drop_index => Ok(AutomatonState::Summary {
                    message: message.clone(),
                    consumed: next_position,
                }),
                _ => Err(Error::Inconsistent("malformed automaton state".into())),
            },
            _ => Err(Error::Inconsistent("malformed automaton state".into())),
        }
    }

    fn encode(&self, state: &AutomatonState) -> Message {
        match state {
            AutomatonState::Fresh => Message::empty(),
            AutomatonState::Summary { message, consumed } => {
                let mut parts = vec![message.clone()];
                if !self.automaton.drop_index {
                    parts.push(Message::uint(*consumed as u64 - 1, self.automaton.index_bits));
                }
                Message::Frames(parts)
            }
        }
    }

    fn advance(&self, view: &PlayerView<'_, u32>, incoming: &Message) -> Result<AutomatonState> {
        let first = view.positions.first().copied().unwrap_or(0);
        let mut state = self.decode(incoming, first)?;
        for (&pos, &x) in view.positions.iter().zip(view.inputs) {
            state = self.automaton.step(&state, pos, x)?;
        }
        Ok(state)
    }
}

impl OneWayProtocol<u32> for AutomatonProtocol<'_> {
    type Output = u32;

    fn players(&self) -> usize {
        self.players
    }

    fn randomness(&self) -> RandomnessMode {
        RandomnessMode::Deterministic
    }

    fn message(&self, view: &PlayerView<'_, u32>, incoming: &Message, _: &Coins) -> Result<Message> {
        Ok(self.encode(&self.advance(view, incoming)?))
    }

    fn output(&self, view: &PlayerView<'_, u32>, incoming: &Message, _: &Coins) -> Result<u32> {
        self.automaton.finish(&self.advance(view, incoming)?)
    }

    fn max_message_bits(&self) -> Option<usize> {
        Some(self.automaton.memory_bits())
    }
}
