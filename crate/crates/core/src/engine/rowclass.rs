use super::{Coins, OneWayProtocol, PlayerView, RandomnessMode};
use crate::bits::{ceil_log2, Message};
use crate::error::{Error, Result};
use crate::function::{row_classes, Domain, FunctionTable, RowClasses};

/// The optimal deterministic one-way protocol for a two-way cut: Alice
/// sends the index of her row class and Bob looks up his column.
#[derive(Clone, Debug)]
pub struct RowClassProtocol {
    cut: usize,
    classes: RowClasses,
    prefix: Domain,
    suffix: Domain,
    width: u32,
}

impl RowClassProtocol {
    pub fn new(f: &FunctionTable, cut: usize, cap: u64) -> Result<Self> {
        let classes = row_classes(f, cut, cap)?;
        Ok(RowClassProtocol {
            cut,
            width: ceil_log2(classes.count() as u64),
            prefix: Domain::new(f.alphabets()[..cut].to_vec()),
            suffix: Domain::new(f.alphabets()[cut..].to_vec()),
            classes,
        })
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn message_bits(&self) -> usize {
        self.width as usize
    }
}

impl OneWayProtocol<u32> for RowClassProtocol {
    type Output = u32;

    fn players(&self) -> usize {
        2
    }

    fn randomness(&self) -> RandomnessMode {
        RandomnessMode::Deterministic
    }

    fn message(&self, view: &PlayerView<'_, u32>, _: &Message, _: &Coins) -> Result<Message> {
        if view.positions.len() != self.cut || view.positions.iter().enumerate().any(|(i, &p)| i != p) {
            return Err(Error::Config(format!(
                "row-class protocol expects the first player to hold positions 0..{}",
                self.cut
            )));
        }
        let class = self.classes.class_of[self.prefix.index_of(view.inputs) as usize];
        Ok(Message::uint(class as u64, self.width))
    }

    fn output(&self, view: &PlayerView<'_, u32>, incoming: &Message, _: &Coins) -> Result<u32> {
        let class = incoming
            .as_bits()
            .and_then(|b| b.reader().read_uint(self.width))
            .ok_or_else(|| Error::Inconsistent("malformed row-class message".into()))?;
        let row = self
            .classes
            .rows
            .get(class as usize)
            .ok_or_else(|| Error::Inconsistent(format!("unknown row class {class}")))?;
        Ok(row[self.suffix.index_of(view.inputs) as usize])
    }

    fn max_message_bits(&self) -> Option<usize> {
        Some(self.width as usize)
    }
}
