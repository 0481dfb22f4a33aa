use crate::error::{Error, Result};
use crate::sumequal::{SumDomain, SumEqualInstance};
use serde::{Deserialize, Serialize};

/// Promise answer of a gap instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GhseLabel {
    One,
    Zero,
    Undefined,
}

/// `n` Sum-Equal coordinates; `Z_i = +1` when coordinate `i` is equal and
/// `-1` otherwise. The answer is 1 when `sum Z_i >= gap`, 0 when
/// `sum Z_i <= -gap`, and undefined in between.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhseInstance {
    pub coordinates: Vec<SumEqualInstance>,
    pub gap: f64,
}

impl GhseInstance {
    pub fn new(coordinates: Vec<SumEqualInstance>, gap: f64) -> Result<Self> {
        if coordinates.is_empty() {
            return Err(Error::Config("an instance needs at least one coordinate".into()));
        }
        let k = coordinates[0].k();
        if coordinates.iter().any(|c| c.k() != k) {
            return Err(Error::Config(
                "all coordinates must have the same number of players".into(),
            ));
        }
        if !(gap >= 0.0) {
            return Err(Error::Parameter(format!("gap {gap} must be non-negative")));
        }
        Ok(GhseInstance { coordinates, gap })
    }

    /// Two-player instance from bit vectors: coordinate `i` is equal exactly
    /// when `alice[i] != bob[i]`.
    pub fn from_bits(alice: &[u8], bob: &[u8], gap: f64) -> Result<Self> {
        if alice.len() != bob.len() {
            return Err(Error::Parameter(format!(
                "vectors differ in length: {} and {}",
                alice.len(),
                bob.len()
            )));
        }
        let coords = alice
            .iter()
            .zip(bob)
            .map(|(&a, &b)| SumEqualInstance {
                domain: SumDomain::Modular { modulus: 2 },
                inputs: vec![(a & 1) as i64, (b & 1) as i64],
                target: 1,
            })
            .collect();
        Self::new(coords, gap)
    }

    pub fn n(&self) -> usize {
        self.coordinates.len()
    }

    pub fn k(&self) -> usize {
        self.coordinates[0].k()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HseEvaluation {
    pub hse: i64,
    pub label: GhseLabel,
}

pub fn hse_value(coordinates: &[SumEqualInstance]) -> i64 {
    coordinates.iter().map(|c| if c.is_equal() { 1 } else { -1 }).sum()
}

pub fn hse_evaluate(g: &GhseInstance) -> HseEvaluation {
    let hse = hse_value(&g.coordinates);
    HseEvaluation {
        hse,
        label: label_for(hse, g.gap),
    }
}

fn label_for(hse: i64, gap: f64) -> GhseLabel {
    if hse as f64 >= gap {
        GhseLabel::One
    } else if hse as f64 <= -gap {
        GhseLabel::Zero
    } else {
        GhseLabel::Undefined
    }
}

/// Replicates every coordinate `n / n'` times, turning a `c`-gap instance on
/// `n' = c^2 / epsilon^2` coordinates into an `epsilon n`-gap instance on `n`
/// coordinates.
pub fn copy_amplify(g: &GhseInstance, c: f64, epsilon: f64, n: usize) -> Result<GhseInstance> {
    if !(c > 0.0 && epsilon > 0.0) {
        return Err(Error::Parameter("c and epsilon must be positive".into()));
    }
    let n_prime = g.n();
    let expected = c * c / (epsilon * epsilon);
    if (expected - n_prime as f64).abs() > 1e-6 * expected.max(1.0) {
        return Err(Error::Parameter(format!(
            "the instance has {n_prime} coordinates but c^2/epsilon^2 = {expected}"
        )));
    }
    if n == 0 || !n.is_multiple_of(n_prime) {
        let below = (n / n_prime).max(1) * n_prime;
        let above = (n / n_prime + 1) * n_prime;
        let nearest = if n - below.min(n) <= above - n { below } else { above };
        return Err(Error::Parameter(format!(
            "n = {n} is not a multiple of n' = {n_prime}; nearest valid n is {nearest}"
        )));
    }
    let factor = n / n_prime;
    let coordinates = g
        .coordinates
        .iter()
        .flat_map(|coord| std::iter::repeat_n(coord.clone(), factor))
        .collect();
    GhseInstance::new(coordinates, epsilon * n as f64)
}

/// Answer of the two-player gap problem from the reduction's bit vectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhseDecision {
    pub hse: i64,
    /// 1 or 0; inside the gap the sign decides.
    pub answer: u8,
    pub in_gap: bool,
}

pub fn ghse_decide(alice: &[u8], bob: &[u8], gap: f64) -> Result<GhseDecision> {
    if alice.len() != bob.len() {
        return Err(Error::Parameter(format!(
            "vectors differ in length: {} and {}",
            alice.len(),
            bob.len()
        )));
    }
    let hse: i64 = alice
        .iter()
        .zip(bob)
        .map(|(&a, &b)| if (a ^ b) & 1 == 1 { 1 } else { -1 })
        .sum();
    let label = label_for(hse, gap);
    Ok(GhseDecision {
        hse,
        answer: match label {
            GhseLabel::One => 1,
            GhseLabel::Zero => 0,
            GhseLabel::Undefined => (hse > 0) as u8,
        },
        in_gap: label == GhseLabel::Undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        let g = GhseInstance::from_bits(&[1, 1, 0, 0], &[0, 0, 0, 1], 2.0).unwrap();
        assert_eq!(
            hse_evaluate(&g),
            HseEvaluation {
                hse: 2,
                label: GhseLabel::One
            }
        );
        let g = GhseInstance::from_bits(&[1, 1, 0, 0], &[1, 0, 0, 1], 1.0).unwrap();
        assert_eq!(hse_evaluate(&g).label, GhseLabel::Undefined);
        assert!(GhseInstance::from_bits(&[1], &[0, 1], 1.0).is_err());
    }

    #[test]
    fn amplification_scales_the_sum() {
        let g = GhseInstance::from_bits(&[1, 1, 0, 0], &[0, 0, 0, 1], 1.0).unwrap();
        let big = copy_amplify(&g, 1.0, 0.5, 12).unwrap();
        assert_eq!(hse_evaluate(&big).hse, 3 * hse_evaluate(&g).hse);
        assert_eq!(big.gap, 6.0);
        let err = copy_amplify(&g, 1.0, 0.5, 10).unwrap_err();
        assert!(err.to_string().contains("nearest valid n is 8"), "{err}");
    }

    #[test]
    fn decision_inside_the_gap() {
        let d = ghse_decide(&[1, 0, 1], &[0, 0, 1], 2.0).unwrap();
        assert_eq!((d.hse, d.answer, d.in_gap), (-1, 0, true));
        assert!(ghse_decide(&[1], &[], 1.0).is_err());
    }
}
