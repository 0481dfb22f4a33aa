//! Bit strings and protocol messages.

use smallvec::SmallVec;
use std::fmt;

/// A packed bit string. Up to 128 bits are stored inline.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    words: SmallVec<[u64; 2]>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    /// `value` written in exactly `width` bits, most significant bit first.
    pub fn from_uint(value: u64, width: u32) -> Self {
        let mut b = Self::new();
        b.push_uint(value, width);
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::new();
        for &x in bits {
            b.push_bit(x);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push_bit(&mut self, bit: bool) {
        let (w, o) = (self.len / 64, self.len % 64);
        if o == 0 {
            self.words.push(0);
        }
        if bit {
            self.words[w] |= 1 << o;
        }
        self.len += 1;
    }

    pub fn push_uint(&mut self, value: u64, width: u32) {
        debug_assert!(width == 64 || value < (1u64 << width), "value does not fit width");
        for i in (0..width).rev() {
            self.push_bit((value >> i) & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &BitString) {
        for i in 0..other.len {
            self.push_bit(other.get(i));
        }
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index out of range");
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"")?;
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        write!(f, "\")")
    }
}

/// Sequential reader over a [`BitString`].
pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl BitReader<'_> {
    pub fn read_bit(&mut self) -> Option<bool> {
        if self.pos >= self.bits.len {
            return None;
        }
        let b = self.bits.get(self.pos);
        self.pos += 1;
        Some(b)
    }

    pub fn read_uint(&mut self, width: u32) -> Option<u64> {
        if self.pos + width as usize > self.bits.len {
            return None;
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Some(v)
    }

    pub fn remaining(&self) -> usize {
        self.bits.len - self.pos
    }
}

/// A message passed from one player to the next.
///
/// `Frames` groups sub-messages (copies of an amplified protocol, or a
/// message plus an index). Framing itself is free: the cost of a message is
/// the total number of payload bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Message {
    Bits(BitString),
    Frames(Vec<Message>),
}

impl Default for Message {
    fn default() -> Self {
        Message::empty()
    }
}

impl Message {
    pub fn empty() -> Self {
        Message::Bits(BitString::new())
    }

    pub fn uint(value: u64, width: u32) -> Self {
        Message::Bits(BitString::from_uint(value, width))
    }

    pub fn bit_len(&self) -> usize {
        match self {
            Message::Bits(b) => b.len(),
            Message::Frames(parts) => parts.iter().map(Message::bit_len).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.bit_len() == 0
    }

    pub fn as_bits(&self) -> Option<&BitString> {
        match self {
            Message::Bits(b) => Some(b),
            Message::Frames(_) => None,
        }
    }

    pub fn frames(&self) -> Option<&[Message]> {
        match self {
            Message::Frames(parts) => Some(parts),
            Message::Bits(_) => None,
        }
    }
}

/// Smallest `w` with `2^w >= n`; zero for `n <= 1`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}
