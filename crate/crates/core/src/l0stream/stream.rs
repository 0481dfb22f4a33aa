use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::path::Path;

/// One turnstile update `x_index += delta`, with a 1-based index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Update {
    pub index: usize,
    pub delta: i64,
}

/// A validated turnstile stream over `[dimension]`.
///
/// Every update has `|delta| <= magnitude`; in a strict stream no
/// coordinate ever goes negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurnstileStream {
    dimension: usize,
    magnitude: i64,
    strict: bool,
    updates: Vec<Update>,
}

impl TurnstileStream {
    pub fn new(dimension: usize, magnitude: i64, strict: bool, updates: Vec<Update>) -> Result<Self> {
        if dimension == 0 || magnitude < 1 {
            return Err(Error::Parameter("dimension and magnitude must be positive".into()));
        }
        let mut values: HashMap<usize, i64> = HashMap::new();
        for (position, u) in updates.iter().enumerate() {
            if u.index == 0 || u.index > dimension {
                return Err(Error::Config(format!(
                    "update {position}: index {} is outside [1, {dimension}]",
                    u.index
                )));
            }
            if u.delta.abs() > magnitude {
                return Err(Error::Config(format!(
                    "update {position}: |{}| exceeds the magnitude bound {magnitude}",
                    u.delta
                )));
            }
            if strict {
                let v = values.entry(u.index).or_insert(0);
                *v += u.delta;
                if *v < 0 {
                    return Err(Error::StrictViolation {
                        position,
                        index: u.index,
                        value: *v,
                    });
                }
            }
        }
        Ok(TurnstileStream {
            dimension,
            magnitude,
            strict,
            updates,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn magnitude(&self) -> i64 {
        self.magnitude
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn updates(&self) -> &[Update] {
        &self.updates
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    /// Text form: a header `N M strict` (strict is 1 or 0) followed by one
    /// `i v` line per update.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.dimension, self.magnitude, self.strict as u8);
        for u in &self.updates {
            out.push_str(&format!("{} {}\n", u.index, u.delta));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty stream file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [n, m, strict] = fields.as_slice() else {
            return Err(Error::Parse(format!("header {header:?} should be `N M strict`")));
        };
        let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad dimension {n:?}")))?;
        let m: i64 = m.parse().map_err(|_| Error::Parse(format!("bad magnitude {m:?}")))?;
        let strict = match *strict {
            "1" | "true" | "strict" => true,
            "0" | "false" | "general" => false,
            other => return Err(Error::Parse(format!("bad strict flag {other:?}"))),
        };
        let updates = lines
            .map(|(line_no, line)| {
                let mut it = line.split_whitespace();
                let parsed = (|| {
                    let index = it.next()?.parse().ok()?;
                    let delta = it.next()?.parse().ok()?;
                    it.next().is_none().then_some(Update { index, delta })
                })();
                parsed.ok_or_else(|| Error::Parse(format!("line {line_no}: expected `i v`, got {line:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, m, strict, updates)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    /// Final frequency vector as `(index, value)` pairs with non-zero value,
    /// sorted by index.
    pub fn frequencies(&self) -> Vec<(usize, i64)> {
        let mut values: HashMap<usize, i64> = HashMap::new();
        for u in &self.updates {
            *values.entry(u.index).or_insert(0) += u.delta;
        }
        let mut out: Vec<(usize, i64)> = values.into_iter().filter(|&(_, v)| v != 0).collect();
        out.sort_unstable();
        out
    }
}

/// Number of non-zero coordinates at the end of the stream.
pub fn exact_l0(stream: &TurnstileStream) -> usize {
    stream.frequencies().len()
}

/// Exact L0 of updates given lazily, using a dense counter array.
pub fn exact_l0_dense(dimension: usize, updates: impl IntoIterator<Item = Update>) -> usize {
    let mut values = vec![0i64; dimension];
    for u in updates {
        values[u.index - 1] += u.delta;
    }
    values.iter().filter(|&&v| v != 0).count()
}

/// A random strict stream of exactly `updates` updates whose final support
/// has exactly `l0` coordinates.
pub fn random_strict_stream(
    dimension: usize,
    updates: usize,
    magnitude: i64,
    l0: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TurnstileStream> {
    if l0 > dimension || l0 > updates || magnitude < 1 {
        return Err(Error::Parameter(format!(
            "cannot reach L0 = {l0} with dimension {dimension} and {updates} updates"
        )));
    }
    let mut coords: Vec<usize> = (1..=dimension).collect();
    coords.shuffle(rng);
    let mut in_support = vec![false; dimension + 1];
    coords[..l0].iter().for_each(|&c| in_support[c] = true);
    let mut values = vec![0i64; dimension + 1];
    let mut positive: Vec<usize> = Vec::new();
    let mut slot = vec![usize::MAX; dimension + 1];
    let mut out = Vec::with_capacity(updates);
    let cleanup = |values: &[i64], c: usize| -> usize {
        if in_support[c] {
            (values[c] == 0) as usize
        } else {
            ((values[c] + magnitude - 1) / magnitude) as usize
        }
    };
    let mut pending: usize = l0;
    let set_value = |values: &mut Vec<i64>, positive: &mut Vec<usize>, slot: &mut Vec<usize>, c: usize, v: i64| {
        let was = values[c] > 0;
        values[c] = v;
        if v > 0 && !was {
            slot[c] = positive.len();
            positive.push(c);
        } else if v == 0 && was {
            let i = slot[c];
            let last = *positive.last().expect("non-empty");
            positive.swap_remove(i);
            if last != c {
                slot[last] = i;
            }
            slot[c] = usize::MAX;
        }
    };
    while out.len() + pending + 3 < updates {
        let insert = positive.is_empty() || rng.gen_bool(0.6);
        let (c, delta) = if insert {
            let c = if rng.gen_bool(0.5) {
                coords[rng.gen_range(0..l0.max(1))]
            } else {
                rng.gen_range(1..=dimension)
            };
            (c, rng.gen_range(1..=magnitude))
        } else {
            let c = positive[rng.gen_range(0..positive.len())];
            (c, -rng.gen_range(1..=values[c].min(magnitude)))
        };
        pending -= cleanup(&values, c);
        let next = values[c] + delta;
        set_value(&mut values, &mut positive, &mut slot, c, next);
        pending += cleanup(&values, c);
        out.push(Update { index: c, delta });
    }
    for c in 1..=dimension {
        if in_support[c] && values[c] == 0 {
            out.push(Update { index: c, delta: 1 });
            values[c] = 1;
        } else if !in_support[c] {
            while values[c] > 0 {
                let d = values[c].min(magnitude);
                out.push(Update { index: c, delta: -d });
                values[c] -= d;
            }
        }
    }
    let free = coords.get(l0).copied();
    while out.len() < updates {
        let left = updates - out.len();
        match (left, free) {
            (_, Some(c)) if left >= 2 && (left != 3 || l0 > 0) => {
                out.push(Update { index: c, delta: 1 });
                out.push(Update { index: c, delta: -1 });
            }
            _ if l0 > 0 => out.push(Update {
                index: coords[left % l0],
                delta: 1,
            }),
            (3, Some(c)) if magnitude >= 2 => {
                out.push(Update { index: c, delta: 2 });
                out.push(Update { index: c, delta: -1 });
                out.push(Update { index: c, delta: -1 });
            }
            _ => return Err(Error::Parameter("cannot pad the stream to the requested length".into())),
        }
    }
    TurnstileStream::new(dimension, magnitude, true, out)
}
