//! Multivariate functions over finite alphabets.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

/// Default cap on the number of points any exhaustive routine will visit.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 24;

/// Mixed-radix enumeration of `[a_1] x ... x [a_k]` with the first
/// coordinate most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    alphabets: Vec<u32>,
}

impl Domain {
    pub fn new(alphabets: Vec<u32>) -> Self {
        Domain { alphabets }
    }

    pub fn alphabets(&self) -> &[u32] {
        &self.alphabets
    }

    pub fn size(&self) -> Option<u64> {
        self.alphabets
            .iter()
            .try_fold(1u64, |acc, &a| acc.checked_mul(a as u64))
    }

    pub fn size_capped(&self, cap: u64) -> Result<u64> {
        match self.size() {
            Some(s) if s <= cap => Ok(s),
            Some(s) => Err(Error::Refused(format!(
                "domain of size {s} exceeds enumeration cap {cap}"
            ))),
            None => Err(Error::Refused(format!("domain size overflows u64 (cap {cap})"))),
        }
    }

    pub fn index_of(&self, x: &[u32]) -> u64 {
        x.iter()
            .zip(&self.alphabets)
            .fold(0u64, |acc, (&v, &a)| acc * a as u64 + v as u64)
    }

    pub fn decode(&self, mut index: u64) -> Vec<u32> {
        let mut out = vec![0; self.alphabets.len()];
        for (slot, &a) in out.iter_mut().zip(&self.alphabets).rev() {
            *slot = (index % a as u64) as u32;
            index /= a as u64;
        }
        out
    }

    /// Advances `x` to the next point; returns false after the last one.
    pub fn advance(&self, x: &mut [u32]) -> bool {
        for (v, &a) in x.iter_mut().zip(&self.alphabets).rev() {
            *v += 1;
            if *v < a {
                return true;
            }
            *v = 0;
        }
        false
    }

    pub fn iter(&self) -> DomainIter<'_> {
        DomainIter {
            domain: self,
            next: if self.alphabets.contains(&0) {
                None
            } else {
                Some(vec![0; self.alphabets.len()])
            },
        }
    }
}

pub struct DomainIter<'a> {
    domain: &'a Domain,
    next: Option<Vec<u32>>,
}

impl Iterator for DomainIter<'_> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if self.domain.advance(&mut succ) {
            self.next = Some(succ);
        }
        Some(current)
    }
}

type Rule = Arc<dyn Fn(&[u32]) -> u32 + Send + Sync>;

#[derive(Clone)]
enum Evaluator {
    Table(Arc<Vec<u32>>),
    Rule(Rule),
}

/// A function `f: [a_1] x ... x [a_k] -> N`, given either as an explicit
/// table or as a rule.
#[derive(Clone)]
pub struct FunctionTable {
    name: String,
    domain: Domain,
    symmetric: bool,
    eval: Evaluator,
}

impl fmt::Debug for FunctionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionTable")
            .field("name", &self.name)
            .field("alphabets", &self.domain.alphabets)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

impl FunctionTable {
    /// Builds a tabulated function; `outputs` is indexed in [`Domain`] order.
    pub fn from_table(alphabets: Vec<u32>, outputs: Vec<u32>, symmetric: bool) -> Result<Self> {
        check_alphabets(&alphabets)?;
        let domain = Domain::new(alphabets);
        let size = domain
            .size()
            .ok_or_else(|| Error::Refused("domain size overflows u64".into()))?;
        if outputs.len() as u64 != size {
            return Err(Error::Config(format!(
                "table has {} entries but the domain has {size}",
                outputs.len()
            )));
        }
        if symmetric && !domain.alphabets.windows(2).all(|w| w[0] == w[1]) {
            return Err(Error::Config("a symmetric function needs a common alphabet".into()));
        }
        let f = FunctionTable {
            name: "table".into(),
            domain,
            symmetric,
            eval: Evaluator::Table(Arc::new(outputs)),
        };
        if symmetric && !f.is_symmetric_exhaustive(DEFAULT_ENUM_CAP)? {
            return Err(Error::Config(
                "table declared symmetric but is not invariant under permutation".into(),
            ));
        }
        Ok(f)
    }

    pub fn from_fn<F>(name: &str, alphabets: Vec<u32>, symmetric: bool, rule: F) -> Result<Self>
    where
        F: Fn(&[u32]) -> u32 + Send + Sync + 'static,
    {
        check_alphabets(&alphabets)?;
        Ok(FunctionTable {
            name: name.into(),
            domain: Domain::new(alphabets),
            symmetric,
            eval: Evaluator::Rule(Arc::new(rule)),
        })
    }

    pub fn parity(k: usize) -> Result<Self> {
        Self::from_fn("parity", vec![2; k], true, |x| {
            x.iter().fold(0, |acc, &v| acc ^ (v & 1))
        })
    }

    /// 1 when all `k` inputs from `[alphabet]` coincide.
    pub fn equality(k: usize, alphabet: u32) -> Result<Self> {
        Self::from_fn("equality", vec![alphabet; k], true, |x| {
            x.windows(2).all(|w| w[0] == w[1]) as u32
        })
    }

    /// 1 when `sum x_j = target (mod m)`, inputs in `Z_m`.
    pub fn sum_equal_mod(k: usize, m: u32, target: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::Parameter("modulus must be at least 2".into()));
        }
        let t = (target % m) as u64;
        Self::from_fn("sum-equal-mod-m", vec![m; k], true, move |x| {
            (x.iter().map(|&v| v as u64).sum::<u64>() % m as u64 == t) as u32
        })
    }

    /// A symmetric function of `m` inputs from `[alphabet]` whose value on
    /// each multiset is drawn uniformly from `[outputs]`.
    pub fn random_symmetric(alphabet: u32, m: usize, outputs: u32, rng: &mut impl rand::Rng) -> Result<Self> {
        if outputs == 0 {
            return Err(Error::Parameter("need at least one output value".into()));
        }
        let domain = Domain::new(vec![alphabet; m]);
        domain.size_capped(DEFAULT_ENUM_CAP)?;
        let mut values = std::collections::BTreeMap::<Vec<u32>, u32>::new();
        let table = domain
            .iter()
            .map(|x| {
                let mut key = x.clone();
                key.sort_unstable();
                *values.entry(key).or_insert_with(|| rng.gen_range(0..outputs))
            })
            .collect();
        let mut f = Self::from_table(vec![alphabet; m], table, true)?;
        f.name = "random-symmetric".into();
        Ok(f)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.domain.alphabets.len()
    }

    pub fn alphabets(&self) -> &[u32] {
        &self.domain.alphabets
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn eval(&self, x: &[u32]) -> u32 {
        debug_assert_eq!(x.len(), self.arity());
        match &self.eval {
            Evaluator::Table(t) => t[self.domain.index_of(x) as usize],
            Evaluator::Rule(r) => r(x),
        }
    }

    /// All outputs in domain order.
    pub fn tabulate(&self, cap: u64) -> Result<Arc<Vec<u32>>> {
        match &self.eval {
            Evaluator::Table(t) => Ok(t.clone()),
            Evaluator::Rule(r) => {
                self.domain.size_capped(cap)?;
                Ok(Arc::new(self.domain.iter().map(|x| r(&x)).collect()))
            }
        }
    }

    /// Checks invariance under adjacent transpositions on every point.
    pub fn is_symmetric_exhaustive(&self, cap: u64) -> Result<bool> {
        if !self.domain.alphabets.windows(2).all(|w| w[0] == w[1]) {
            return Ok(false);
        }
        self.domain.size_capped(cap)?;
        for x in self.domain.iter() {
            let v = self.eval(&x);
            for i in 1..x.len() {
                let mut y = x.clone();
                y.swap(i - 1, i);
                if self.eval(&y) != v {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Parses the JSON description documented on [`FunctionSpec`].
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: FunctionSpec = serde_json::from_str(text)?;
        spec.build()
    }

    /// Tabulated JSON form: `rows` lists `[x_1, ..., x_k, f(x)]`.
    pub fn to_json(&self, cap: u64) -> Result<String> {
        let table = self.tabulate(cap)?;
        let rows = self
            .domain
            .iter()
            .zip(table.iter())
            .map(|(mut x, &v)| {
                x.push(v);
                x
            })
            .collect();
        let spec = FunctionSpec::Table {
            arity: self.arity(),
            alphabets: self.alphabets().to_vec(),
            rows,
            symmetric: self.symmetric,
        };
        Ok(serde_json::to_string(&spec)?)
    }
}

fn check_alphabets(alphabets: &[u32]) -> Result<()> {
    if alphabets.is_empty() {
        return Err(Error::Config("a function needs at least one argument".into()));
    }
    if alphabets.contains(&0) {
        return Err(Error::Config("alphabets must be non-empty".into()));
    }
    Ok(())
}

/// JSON description of a function.
///
/// Either a builtin, e.g. `{"builtin": "sum-equal-mod-m", "arity": 4,
/// "modulus": 5}`, or an explicit table `{"arity": 2, "alphabets": [2, 2],
/// "rows": [[0, 0, 1], [0, 1, 0], [1, 0, 0], [1, 1, 1]]}` where each row is
/// an input followed by its output and every input appears exactly once.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Builtin {
        builtin: String,
        arity: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alphabet: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modulus: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<u32>,
    },
    Table {
        arity: usize,
        alphabets: Vec<u32>,
        rows: Vec<Vec<u32>>,
        #[serde(default)]
        symmetric: bool,
    },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<FunctionTable> {
        match self {
            FunctionSpec::Builtin {
                builtin,
                arity,
                alphabet,
                modulus,
                target,
            } => match builtin.as_str() {
                "parity" => FunctionTable::parity(*arity),
                "equality" => FunctionTable::equality(*arity, alphabet.unwrap_or(2)),
                "sum-equal-mod-m" => {
                    let m = modulus.ok_or_else(|| Error::Config("sum-equal-mod-m needs a modulus".into()))?;
                    FunctionTable::sum_equal_mod(*arity, m, target.unwrap_or(0))
                }
                other => Err(Error::Config(format!("unknown builtin function {other:?}"))),
            },
            FunctionSpec::Table {
                arity,
                alphabets,
                rows,
                symmetric,
            } => {
                if alphabets.len() != *arity {
                    return Err(Error::Config(format!(
                        "arity {arity} but {} alphabets",
                        alphabets.len()
                    )));
                }
                check_alphabets(alphabets)?;
                let domain = Domain::new(alphabets.clone());
                let size = domain.size_capped(DEFAULT_ENUM_CAP)? as usize;
                let mut outputs = vec![None; size];
                for row in rows {
                    if row.len() != arity + 1 {
                        return Err(Error::Config(format!("row {row:?} should have {} entries", arity + 1)));
                    }
                    let (x, v) = row.split_at(*arity);
                    if x.iter().zip(alphabets).any(|(&xi, &a)| xi >= a) {
                        return Err(Error::Config(format!("row {row:?} is outside the domain")));
                    }
                    let slot = &mut outputs[domain.index_of(x) as usize];
                    if slot.is_some() {
                        return Err(Error::Config(format!("input {x:?} listed twice")));
                    }
                    *slot = Some(v[0]);
                }
                let outputs = outputs
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.ok_or_else(|| Error::Config(format!("input {:?} has no row", domain.decode(i as u64))))
                    })
                    .collect::<Result<Vec<_>>>()?;
                FunctionTable::from_table(alphabets.clone(), outputs, *symmetric)
            }
        }
    }
}

/// Number of distinct rows of the communication matrix at `cut`, where the
/// rows are indexed by the first `cut` inputs.
pub fn row_classes(f: &FunctionTable, cut: usize, cap: u64) -> Result<RowClasses> {
    if cut > f.arity() {
        return Err(Error::Config(format!("cut {cut} exceeds arity {}", f.arity())));
    }
    let table = f.tabulate(cap)?;
    let prefix = Domain::new(f.alphabets()[..cut].to_vec());
    let suffix = Domain::new(f.alphabets()[cut..].to_vec());
    let p = prefix.size().unwrap_or(0) as usize;
    let s = suffix.size().unwrap_or(0) as usize;
    let mut ids = std::collections::HashMap::<&[u32], u32>::new();
    let mut class_of = Vec::with_capacity(p);
    let mut representatives = Vec::new();
    for r in 0..p {
        let row = &table[r * s..(r + 1) * s];
        let next = ids.len() as u32;
        let id = *ids.entry(row).or_insert_with(|| {
            representatives.push(r as u64);
            next
        });
        class_of.push(id);
    }
    let rows = representatives
        .iter()
        .map(|&r| table[r as usize * s..(r as usize + 1) * s].to_vec())
        .collect();
    Ok(RowClasses {
        cut,
        class_of,
        representatives,
        rows,
    })
}

/// The row partition of a communication matrix.
#[derive(Clone, Debug)]
pub struct RowClasses {
    pub cut: usize,
    /// Class id of every prefix, in domain order.
    pub class_of: Vec<u32>,
    /// First prefix index of every class.
    pub representatives: Vec<u64>,
    /// The distinct rows, indexed by class id.
    pub rows: Vec<Vec<u32>>,
}

impl RowClasses {
    pub fn count(&self) -> usize {
        self.rows.len()
    }
}

/// Deterministic one-way two-party complexity at a cut:
/// `ceil(log2(#distinct rows))`.
pub fn oneway_dcc2_oracle(f: &FunctionTable, cut: usize, cap: u64) -> Result<u32> {
    let classes = row_classes(f, cut, cap)?;
    Ok(crate::bits::ceil_log2(classes.count() as u64))
}

/// Distinct rows by hashing whole rows; kept separate from [`row_classes`]
/// so the two can be checked against each other.
pub fn distinct_rows(f: &FunctionTable, cut: usize, cap: u64) -> Result<usize> {
    let table = f.tabulate(cap)?;
    let s = Domain::new(f.alphabets()[cut..].to_vec()).size().unwrap_or(0) as usize;
    let set: HashSet<&[u32]> = table.chunks(s.max(1)).collect();
    Ok(set.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_roundtrip() {
        let d = Domain::new(vec![2, 3, 4]);
        for (i, x) in d.iter().enumerate() {
            assert_eq!(d.index_of(&x), i as u64);
            assert_eq!(d.decode(i as u64), x);
        }
        assert_eq!(d.iter().count(), 24);
    }

    #[test]
    fn json_table_roundtrip() {
        let f = FunctionTable::sum_equal_mod(3, 3, 1).unwrap();
        let text = f.to_json(1000).unwrap();
        let g = FunctionTable::from_json(&text).unwrap();
        for x in f.domain().iter() {
            assert_eq!(f.eval(&x), g.eval(&x));
        }
        assert!(g.is_symmetric());
    }

    #[test]
    fn json_builtins() {
        let f = FunctionTable::from_json(r#"{"builtin":"parity","arity":3}"#).unwrap();
        assert_eq!(f.eval(&[1, 1, 1]), 1);
        let f = FunctionTable::from_json(r#"{"builtin":"sum-equal-mod-m","arity":2,"modulus":5}"#).unwrap();
        assert_eq!(f.eval(&[2, 3]), 1);
        assert!(FunctionTable::from_json(r#"{"builtin":"nope","arity":3}"#).is_err());
    }

    #[test]
    fn table_rejects_false_symmetry() {
        let err = FunctionTable::from_table(vec![2, 2], vec![0, 1, 0, 0], true).unwrap_err();
        assert_eq!(err.kind(), "config");
    }

    #[test]
    fn parity_needs_one_bit_at_every_cut() {
        let f = FunctionTable::parity(5).unwrap();
        for cut in 1..5 {
            assert_eq!(oneway_dcc2_oracle(&f, cut, 1 << 10).unwrap(), 1);
        }
    }

    #[test]
    fn equality_rows() {
        let f = FunctionTable::equality(2, 5).unwrap();
        assert_eq!(distinct_rows(&f, 1, 100).unwrap(), 5);
        assert_eq!(oneway_dcc2_oracle(&f, 1, 100).unwrap(), 3);
    }
}
