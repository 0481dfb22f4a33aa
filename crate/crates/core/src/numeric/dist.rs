use super::mass::Mass;
use crate::error::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::collections::BTreeMap;

/// A finitely supported distribution with explicit point masses.
///
/// Points of zero mass are dropped, so `support()` lists exactly the values
/// with positive probability, in increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDist<V: Ord, P: Mass = f64> {
    masses: BTreeMap<V, P>,
}

fn tolerance<P: Mass>() -> f64 {
    if P::EXACT {
        0.0
    } else {
        1e-9
    }
}

impl<V: Ord + Clone, P: Mass> ExactDist<V, P> {
    /// Repeated values are merged. The masses must be non-negative and sum
    /// to one (exactly for rationals, within 1e-9 for floats).
    pub fn new(points: impl IntoIterator<Item = (V, P)>) -> Result<Self> {
        let d = Self::unnormalized(points)?;
        let total = d.total_mass().to_f64();
        let exact_one = d.total_mass() == P::one();
        if !(exact_one || (!P::EXACT && (total - 1.0).abs() <= tolerance::<P>())) {
            return Err(Error::Config(format!("masses sum to {total}, not 1")));
        }
        Ok(d)
    }

    /// Like [`ExactDist::new`] without the normalization check; used for
    /// sub-distributions.
    pub fn unnormalized(points: impl IntoIterator<Item = (V, P)>) -> Result<Self> {
        let mut masses = BTreeMap::new();
        for (v, p) in points {
            if p < P::zero() {
                return Err(Error::Config(format!("negative mass {:?}", p)));
            }
            if p.is_zero() {
                continue;
            }
            let slot = masses.entry(v).or_insert_with(P::zero);
            *slot = slot.clone() + p;
        }
        Ok(ExactDist { masses })
    }

    pub fn point(v: V) -> Self {
        ExactDist {
            masses: BTreeMap::from([(v, P::one())]),
        }
    }

    pub fn uniform(values: impl IntoIterator<Item = V>) -> Result<Self> {
        let values: Vec<V> = values.into_iter().collect();
        if values.is_empty() {
            return Err(Error::Config("uniform distribution over an empty set".into()));
        }
        let n = values.len() as u64;
        Self::new(values.into_iter().map(|v| (v, P::ratio(1, n))))
    }

    /// Masses proportional to `counts`.
    pub fn from_counts(counts: impl IntoIterator<Item = (V, u64)>) -> Result<Self> {
        let counts: Vec<(V, u64)> = counts.into_iter().collect();
        let total: u64 = counts.iter().map(|c| c.1).sum();
        if total == 0 {
            return Err(Error::Config("all counts are zero".into()));
        }
        Self::new(counts.into_iter().map(|(v, c)| (v, P::ratio(c, total))))
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn support(&self) -> Vec<V> {
        self.masses.keys().cloned().collect()
    }

    pub fn probs(&self) -> Vec<P> {
        self.masses.values().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&V, &P)> {
        self.masses.iter()
    }

    pub fn prob(&self, v: &V) -> P {
        self.masses.get(v).cloned().unwrap_or_else(P::zero)
    }

    pub fn total_mass(&self) -> P {
        self.masses.values().fold(P::zero(), |a, p| a + p.clone())
    }

    pub fn max_prob(&self) -> P {
        self.masses
            .values()
            .fold(P::zero(), |a, p| if *p > a { p.clone() } else { a })
    }

    /// Distribution of `g(X)`.
    pub fn map<W: Ord + Clone>(&self, g: impl Fn(&V) -> W) -> ExactDist<W, P> {
        let mut masses = BTreeMap::new();
        for (v, p) in &self.masses {
            let slot = masses.entry(g(v)).or_insert_with(P::zero);
            *slot = slot.clone() + p.clone();
        }
        ExactDist { masses }
    }

    /// Distribution of `combine(X, Y)` for independent `X ~ self`, `Y ~ other`.
    pub fn combine<W: Ord + Clone, U: Ord + Clone>(
        &self,
        other: &ExactDist<W, P>,
        combine: impl Fn(&V, &W) -> U,
    ) -> ExactDist<U, P> {
        let mut masses = BTreeMap::new();
        for (v, p) in &self.masses {
            for (w, q) in &other.masses {
                let slot = masses.entry(combine(v, w)).or_insert_with(P::zero);
                *slot = slot.clone() + p.clone() * q.clone();
            }
        }
        ExactDist { masses }
    }

    /// Mixture `sum_i w_i D_i`.
    pub fn mixture(parts: &[(P, ExactDist<V, P>)]) -> ExactDist<V, P> {
        let mut masses = BTreeMap::new();
        for (w, d) in parts {
            for (v, p) in &d.masses {
                let slot = masses.entry(v.clone()).or_insert_with(P::zero);
                *slot = slot.clone() + w.clone() * p.clone();
            }
        }
        masses.retain(|_, p: &mut P| !p.is_zero());
        ExactDist { masses }
    }

    pub fn to_json(&self) -> serde_json::Value
    where
        V: Serialize,
    {
        serde_json::json!({
            "support": self.masses.keys().collect::<Vec<_>>(),
            "probs": self.masses.values().map(Mass::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self>
    where
        V: DeserializeOwned,
    {
        let support: Vec<V> = serde_json::from_value(
            value
                .get("support")
                .cloned()
                .ok_or_else(|| Error::Parse("missing \"support\"".into()))?,
        )?;
        let probs = value
            .get("probs")
            .and_then(|p| p.as_array())
            .ok_or_else(|| Error::Parse("missing \"probs\" array".into()))?;
        if probs.len() != support.len() {
            return Err(Error::Parse("support and probs differ in length".into()));
        }
        let probs = probs
            .iter()
            .map(|p| P::from_json(p).ok_or_else(|| Error::Parse(format!("bad probability {p}"))))
            .collect::<Result<Vec<P>>>()?;
        Self::new(support.into_iter().zip(probs))
    }
}

/// Total variation distance `1/2 sum |p(v) - q(v)|`.
pub fn statistical_distance<V: Ord + Clone, P: Mass>(a: &ExactDist<V, P>, b: &ExactDist<V, P>) -> P {
    let mut sum = P::zero();
    for (v, p) in a.iter() {
        sum = sum + (p.clone() - b.prob(v)).abs_val();
    }
    for (v, q) in b.iter() {
        if a.prob(v).is_zero() {
            sum = sum + q.clone();
        }
    }
    sum.half()
}

/// Shannon entropy in bits.
pub fn entropy<V: Ord + Clone, P: Mass>(d: &ExactDist<V, P>) -> f64 {
    -d.iter()
        .map(|(_, p)| {
            let p = p.to_f64();
            if p > 0.0 {
                p * p.log2()
            } else {
                0.0
            }
        })
        .sum::<f64>()
}

/// `-log2 max_v p(v)`.
pub fn min_entropy<V: Ord + Clone, P: Mass>(d: &ExactDist<V, P>) -> f64 {
    -d.max_prob().to_f64().log2()
}

/// `I(A; B)` in bits from a joint distribution on pairs.
pub fn mutual_information<A: Ord + Clone, B: Ord + Clone, P: Mass>(joint: &ExactDist<(A, B), P>) -> f64 {
    let left = joint.map(|(a, _)| a.clone());
    let right = joint.map(|(_, b)| b.clone());
    (entropy(&left) + entropy(&right) - entropy(joint)).max(0.0)
}

/// One term of a two-point decomposition: `weight` times the uniform
/// distribution on `{low, high}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPointComponent<V, P> {
    pub weight: P,
    pub low: V,
    pub high: V,
}

/// Writes `d` as a convex combination of uniform distributions on two
/// distinct points. Requires at least two support points and
/// `max p(v) <= 1/2`.
pub fn two_point_decompose<V: Ord + Clone, P: Mass>(d: &ExactDist<V, P>) -> Result<Vec<TwoPointComponent<V, P>>> {
    if d.len() < 2 {
        return Err(Error::Precondition("support has fewer than two points".into()));
    }
    let total = d.total_mass();
    let half = total.half();
    let slack = P::ratio(1, 1_000_000_000_000);
    let over = if P::EXACT {
        d.max_prob() > half
    } else {
        d.max_prob() > half.clone() + slack.clone()
    };
    if over {
        return Err(Error::Precondition(format!(
            "max mass {:.6} exceeds half the total",
            d.max_prob().to_f64()
        )));
    }
    let mut rest: Vec<(V, P)> = d.iter().map(|(v, p)| (v.clone(), p.clone())).collect();
    let mut remaining = total;
    let mut out = Vec::new();
    let limit = 2 * d.len() + 2;
    while !rest.is_empty() {
        if out.len() >= limit {
            return Err(Error::Inconsistent("decomposition did not terminate".into()));
        }
        rest.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        if rest.len() == 1 {
            if rest[0].1.is_negligible() {
                break;
            }
            return Err(Error::Inconsistent("one point left with positive mass".into()));
        }
        let p2 = rest[1].1.clone();
        let p3 = rest.get(2).map_or_else(P::zero, |r| r.1.clone());
        let cap = remaining.half() - p3;
        let step = if cap < p2 { cap } else { p2 };
        let step = if step < P::zero() { P::zero() } else { step };
        let (low, high) = if rest[0].0 < rest[1].0 {
            (rest[0].0.clone(), rest[1].0.clone())
        } else {
            (rest[1].0.clone(), rest[0].0.clone())
        };
        out.push(TwoPointComponent {
            weight: step.clone() + step.clone(),
            low,
            high,
        });
        rest[0].1 = rest[0].1.clone() - step.clone();
        rest[1].1 = rest[1].1.clone() - step.clone();
        remaining = remaining - step.clone() - step;
        rest.retain(|(_, p)| !p.is_negligible() && *p > P::zero());
    }
    Ok(out)
}

/// Inverse of [`two_point_decompose`].
pub fn recompose<V: Ord + Clone, P: Mass>(parts: &[TwoPointComponent<V, P>]) -> ExactDist<V, P> {
    let mut masses = BTreeMap::new();
    for c in parts {
        let h = c.weight.half();
        for v in [&c.low, &c.high] {
            let slot = masses.entry(v.clone()).or_insert_with(P::zero);
            *slot = slot.clone() + h.clone();
        }
    }
    ExactDist { masses }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::BigRational;

    fn q(n: u64, d: u64) -> BigRational {
        <BigRational as Mass>::ratio(n, d)
    }

    #[test]
    fn distance_between_shifted_coins() {
        let a = ExactDist::<i64, BigRational>::new([(0, q(1, 2)), (1, q(1, 2))]).unwrap();
        let b = a.map(|v| v + 1);
        assert_eq!(statistical_distance(&a, &b), q(1, 2));
        assert_eq!(statistical_distance(&a, &a), q(0, 1));
    }

    #[test]
    fn entropy_values() {
        let u = ExactDist::<u32, f64>::uniform(0..8).unwrap();
        assert!((entropy(&u) - 3.0).abs() < 1e-12);
        assert!((min_entropy(&u) - 3.0).abs() < 1e-12);
        let p = ExactDist::<u32, f64>::point(4);
        assert_eq!(entropy(&p), 0.0);
    }

    #[test]
    fn mutual_information_of_copies_and_independent_pairs() {
        let copy = ExactDist::<(u8, u8), f64>::uniform([(0, 0), (1, 1)]).unwrap();
        assert!((mutual_information(&copy) - 1.0).abs() < 1e-12);
        let ind = ExactDist::<(u8, u8), f64>::uniform([(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        assert!(mutual_information(&ind).abs() < 1e-12);
    }

    #[test]
    fn decomposition_examples() {
        let d = ExactDist::<u8, BigRational>::new([(0, q(1, 2)), (1, q(1, 4)), (2, q(1, 4))]).unwrap();
        let parts = two_point_decompose(&d).unwrap();
        assert_eq!(recompose(&parts), d);
        assert!(parts.iter().all(|c| c.low != c.high));
        let skewed = ExactDist::<u8, BigRational>::new([(0, q(2, 3)), (1, q(1, 3))]).unwrap();
        assert_eq!(two_point_decompose(&skewed).unwrap_err().kind(), "precondition");
        assert!(two_point_decompose(&ExactDist::<u8, BigRational>::point(0)).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let d = ExactDist::<i64, BigRational>::new([(-1, q(1, 3)), (5, q(2, 3))]).unwrap();
        let j = d.to_json();
        assert_eq!(j["probs"][0], "1/3");
        assert_eq!(ExactDist::<i64, BigRational>::from_json(&j).unwrap(), d);
        let f = ExactDist::<i64, f64>::new([(2, 0.25), (1, 0.75)]).unwrap();
        assert_eq!(f.to_json().to_string(), r#"{"probs":[0.75,0.25],"support":[1,2]}"#);
    }
}
