use crate::bits::Message;
use crate::engine::{Coins, OneWayProtocol, PlayerView, RandomnessMode};
use crate::error::{Error, Result};
use crate::numeric::{majority_error, majority_error_bound};
use serde::Serialize;

/// How many independent copies a majority vote needs.
///
/// With per-copy error `delta < 1/2`, `2t + 1` copies fail with probability
/// at most `(4 delta (1 - delta))^t * delta`; `t` is the least integer that
/// pushes this below `epsilon`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplifierPlan {
    pub delta: f64,
    pub epsilon: f64,
    pub t: u64,
    pub copies: u64,
    pub exact_error: f64,
    pub error_bound: f64,
}

impl AmplifierPlan {
    pub fn new(delta: f64, epsilon: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&delta) {
            return Err(Error::Parameter(format!("delta = {delta} must lie in [0, 1/2)")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::Parameter(format!("epsilon = {epsilon} must be positive")));
        }
        let t = if delta <= epsilon {
            0
        } else {
            ((epsilon / delta).ln() / (4.0 * delta * (1.0 - delta)).ln()).ceil() as u64
        };
        Ok(AmplifierPlan {
            delta,
            epsilon,
            t,
            copies: 2 * t + 1,
            exact_error: majority_error(delta, t),
            error_bound: majority_error_bound(delta, t),
        })
    }

    /// Target `epsilon = delta^2 / (16 k^2)`, the accuracy each two-party
    /// protocol needs inside the k-player simulation. Then
    /// `t = ceil(log(delta / (16 k^2)) / log(4 delta (1 - delta)))`.
    pub fn for_k_from_two(delta: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("k must be positive".into()));
        }
        Self::new(delta, delta * delta / (16.0 * (k * k) as f64))
    }
}

/// `copies` independent runs of a protocol with a plurality vote at the end.
/// Each player sends the tuple of its per-copy messages.
#[derive(Clone, Debug)]
pub struct Amplified<P> {
    inner: P,
    copies: usize,
}

impl<P> Amplified<P> {
    pub fn new(inner: P, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::Parameter("at least one copy is needed".into()));
        }
        Ok(Amplified { inner, copies })
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    fn incoming<'m>(&self, incoming: &'m Message) -> Result<Vec<&'m Message>> {
        static EMPTY: std::sync::OnceLock<Message> = std::sync::OnceLock::new();
        match incoming {
            Message::Bits(b) if b.is_empty() => Ok(vec![EMPTY.get_or_init(Message::empty); self.copies]),
            Message::Frames(parts) if parts.len() == self.copies => Ok(parts.iter().collect()),
            _ => Err(Error::Inconsistent(format!("expected {} framed copies", self.copies))),
        }
    }
}

/// Amplifies `protocol` from error `delta` to at most `epsilon`.
pub fn amplify_majority<P>(protocol: P, delta: f64, epsilon: f64) -> Result<(Amplified<P>, AmplifierPlan)> {
    let plan = AmplifierPlan::new(delta, epsilon)?;
    Ok((Amplified::new(protocol, plan.copies as usize)?, plan))
}

impl<X, P: OneWayProtocol<X>> OneWayProtocol<X> for Amplified<P> {
    type Output = P::Output;

    fn players(&self) -> usize {
        self.inner.players()
    }

    fn randomness(&self) -> RandomnessMode {
        self.inner.randomness()
    }

    fn message(&self, view: &PlayerView<'_, X>, incoming: &Message, coins: &Coins) -> Result<Message> {
        let parts = self.incoming(incoming)?;
        let mut out = Vec::with_capacity(self.copies);
        for (c, part) in parts.into_iter().enumerate() {
            out.push(self.inner.message(view, part, &coins.fork("copy", c as u64))?);
        }
        Ok(Message::Frames(out))
    }

    fn output(&self, view: &PlayerView<'_, X>, incoming: &Message, coins: &Coins) -> Result<P::Output> {
        let parts = self.incoming(incoming)?;
        let mut tally: Vec<(P::Output, usize)> = Vec::with_capacity(2);
        for (c, part) in parts.into_iter().enumerate() {
            let o = self.inner.output(view, part, &coins.fork("copy", c as u64))?;
            match tally.iter_mut().find(|(v, _)| *v == o) {
                Some(slot) => slot.1 += 1,
                None => tally.push((o, 1)),
            }
        }
        // First value to reach the top count wins ties.
        let best = tally.iter().map(|t| t.1).max().unwrap_or(0);
        Ok(tally.into_iter().find(|t| t.1 == best).expect("at least one copy").0)
    }

    fn max_message_bits(&self) -> Option<usize> {
        self.inner.max_message_bits().map(|b| b * self.copies)
    }

    fn message_matches(
        &self,
        view: &PlayerView<'_, X>,
        incoming: &Message,
        coins: &Coins,
        expected: &Message,
    ) -> Result<bool> {
        let want = match expected.frames() {
            Some(parts) if parts.len() == self.copies => parts,
            _ => return Ok(false),
        };
        for (c, (part, w)) in self.incoming(incoming)?.into_iter().zip(want).enumerate() {
            if !self
                .inner
                .message_matches(view, part, &coins.fork("copy", c as u64), w)?
            {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
