use crate::error::{Error, Result};
use crate::numeric::{BigRational, ExactDist, Mass};
use num::bigint::BigInt;
use num::Signed;
use serde::Serialize;
use std::collections::BTreeSet;

/// A combinatorial rectangle `R_1 x ... x R_{k-1}` of the first `k - 1`
/// players' inputs, each input being a vector in `Z_p^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rectangle {
    p: u64,
    m: usize,
    sets: Vec<Vec<Vec<u64>>>,
}

impl Rectangle {
    pub fn new(p: u64, m: usize, sets: Vec<Vec<Vec<u64>>>) -> Result<Self> {
        if p < 2 || m == 0 || sets.is_empty() {
            return Err(Error::Parameter("need p >= 2, m >= 1 and at least one set".into()));
        }
        let mut clean = Vec::with_capacity(sets.len());
        for (j, set) in sets.into_iter().enumerate() {
            if let Some(v) = set.iter().find(|v| v.len() != m || v.iter().any(|&x| x >= p)) {
                return Err(Error::Config(format!("player {j}: {v:?} is not in Z_{p}^{m}")));
            }
            let set: BTreeSet<Vec<u64>> = set.into_iter().collect();
            if set.is_empty() {
                return Err(Error::Config(format!("player {j} has an empty set")));
            }
            clean.push(set.into_iter().collect());
        }
        Ok(Rectangle { p, m, sets: clean })
    }

    /// Rectangle whose player-`j` set is the product of per-copy subsets
    /// `copies[j][c] ⊆ Z_p`.
    pub fn product(p: u64, m: usize, copies: Vec<Vec<Vec<u64>>>) -> Result<Self> {
        let sets = copies
            .into_iter()
            .map(|per_copy| {
                if per_copy.len() != m {
                    return Err(Error::Config(format!("expected {m} per-copy subsets")));
                }
                let mut acc: Vec<Vec<u64>> = vec![Vec::new()];
                for subset in per_copy {
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            subset.iter().map(move |&x| {
                                let mut v = prefix.clone();
                                v.push(x);
                                v
                            })
                        })
                        .collect();
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(p, m, sets)
    }

    pub fn full(k: usize, m: usize, p: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::Parameter("k must be at least 2".into()));
        }
        Self::product(p, m, vec![vec![(0..p).collect(); m]; k - 1])
    }

    pub fn k(&self) -> usize {
        self.sets.len() + 1
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn sets(&self) -> &[Vec<Vec<u64>>] {
        &self.sets
    }

    pub fn size(&self) -> u128 {
        self.sets.iter().map(|s| s.len() as u128).product()
    }
}

/// Distribution of the last player's coordinates under `G` conditioned on
/// a rectangle.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub k: usize,
    pub m: usize,
    pub p: u64,
    /// 0-based copies probed, in the order used for `prefix_sd`.
    pub copies: Vec<usize>,
    pub rectangle_size: String,
    /// `|R| / p^(m (k - 1))`, exact and approximate.
    pub mass_exact: String,
    pub mass: f64,
    /// Distance from uniform on `Z_p^|L|` of `(X_k)_L` given `R`.
    pub sd_exact: String,
    pub sd: f64,
    /// Distance from uniform of the first `1, 2, ..., |L|` probed copies.
    pub prefix_sd: Vec<f64>,
    #[serde(skip)]
    pub conditional: ExactDist<Vec<u64>, BigRational>,
}

/// Exact conditional distribution of `X_{k,L} = -sum_{j<k} X_{j,L}` given
/// `X_{<k} ∈ R` under the uniform `G` distribution.
///
/// Refuses when `p^(m (k - 1))` exceeds `cap`.
pub fn rectangle_conditional_probe(rect: &Rectangle, copies: &[usize], cap: u64) -> Result<ProbeReport> {
    let (p, m, k) = (rect.p, rect.m, rect.k());
    let exponent = (m * (k - 1)) as u32;
    let space = p
        .checked_pow(exponent)
        .filter(|&s| s <= cap)
        .ok_or_else(|| Error::Refused(format!("p^(m(k-1)) = {p}^{exponent} exceeds the cap {cap}")))?;
    if copies.is_empty() || copies.iter().any(|&c| c >= m) {
        return Err(Error::Parameter(format!(
            "copies {copies:?} must be a non-empty subset of 0..{m}"
        )));
    }
    if copies.iter().collect::<BTreeSet<_>>().len() != copies.len() {
        return Err(Error::Parameter("copies must be distinct".into()));
    }
    let l = copies.len();
    let cells = (p as usize).pow(l as u32);
    let encode = |digits: &[u64]| digits.iter().fold(0usize, |acc, &d| acc * p as usize + d as usize);
    let decode = |mut idx: usize| {
        let mut d = vec![0u64; l];
        for slot in d.iter_mut().rev() {
            *slot = (idx % p as usize) as u64;
            idx /= p as usize;
        }
        d
    };
    let add = |a: usize, b: usize| {
        let (da, db) = (decode(a), decode(b));
        let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
        encode(&sum)
    };
    let mut acc = vec![0u128; cells];
    acc[0] = 1;
    for set in &rect.sets {
        let mut counts = vec![0u128; cells];
        for v in set {
            let proj: Vec<u64> = copies.iter().map(|&c| v[c]).collect();
            counts[encode(&proj)] += 1;
        }
        let mut next = vec![0u128; cells];
        for (a, &ca) in acc.iter().enumerate().filter(|(_, &c)| c > 0) {
            for (b, &cb) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
                next[add(a, b)] += ca * cb;
            }
        }
        acc = next;
    }
    let total = rect.size();
    let negate = |idx: usize| decode(idx).into_iter().map(|x| (p - x) % p).collect::<Vec<u64>>();
    let points: Vec<(Vec<u64>, u128)> = acc.iter().enumerate().map(|(i, &c)| (negate(i), c)).collect();
    let conditional = ExactDist::<Vec<u64>, BigRational>::new(
        points
            .iter()
            .map(|(v, c)| (v.clone(), BigRational::new(BigInt::from(*c), BigInt::from(total)))),
    )?;
    let mut prefix_sd = Vec::with_capacity(l);
    let mut sd_exact = None;
    for len in 1..=l {
        let marginal = conditional.map(|v| v[..len].to_vec());
        let sd = uniform_distance(&marginal, (p as usize).pow(len as u32));
        prefix_sd.push(Mass::to_f64(&sd));
        if len == l {
            sd_exact = Some(sd);
        }
    }
    let sd_exact = sd_exact.expect("at least one copy");
    let mass = BigRational::new(BigInt::from(total), BigInt::from(space));
    Ok(ProbeReport {
        k,
        m,
        p,
        copies: copies.to_vec(),
        rectangle_size: total.to_string(),
        mass_exact: mass.to_string(),
        mass: Mass::to_f64(&mass),
        sd: Mass::to_f64(&sd_exact),
        sd_exact: sd_exact.to_string(),
        prefix_sd,
        conditional,
    })
}

fn uniform_distance(d: &ExactDist<Vec<u64>, BigRational>, cells: usize) -> BigRational {
    let u = BigRational::new(BigInt::from(1), BigInt::from(cells));
    let missing = cells - d.len();
    let present = d
        .iter()
        .fold(BigRational::from(BigInt::from(0)), |acc, (_, q)| acc + (q - &u).abs());
    (present + u * BigRational::from(BigInt::from(missing))) / BigRational::from(BigInt::from(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_rectangle_is_uniform() {
        let r = Rectangle::full(3, 2, 3).unwrap();
        let rep = rectangle_conditional_probe(&r, &[0, 1], 1 << 20).unwrap();
        assert_eq!(rep.sd, 0.0);
        assert_eq!(rep.mass_exact, "1");
    }

    #[test]
    fn single_point_is_far_from_uniform() {
        let r = Rectangle::new(5, 1, vec![vec![vec![2]], vec![vec![1]]]).unwrap();
        let rep = rectangle_conditional_probe(&r, &[0], 1000).unwrap();
        assert_eq!(rep.sd_exact, "4/5");
        assert_eq!(rep.conditional.support(), vec![vec![2]]);
    }

    #[test]
    fn cap_is_enforced() {
        let r = Rectangle::full(4, 3, 5).unwrap();
        assert_eq!(
            rectangle_conditional_probe(&r, &[0], 1000).unwrap_err().kind(),
            "refused"
        );
    }
}
