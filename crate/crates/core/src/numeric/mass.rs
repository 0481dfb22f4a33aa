use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

/// Probability mass: `f64` for speed or `BigRational` for exact answers.
pub trait Mass:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    const EXACT: bool;

    fn ratio(num: u64, den: u64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs_val(&self) -> Self;
    fn to_json(&self) -> serde_json::Value;
    fn from_json(v: &serde_json::Value) -> Option<Self>;

    /// Zero up to the rounding slack of the representation.
    fn is_negligible(&self) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.to_f64().abs() < 1e-15
        }
    }

    fn half(&self) -> Self {
        self.clone() / Self::ratio(2, 1)
    }
}

impl Mass for f64 {
    const EXACT: bool = false;

    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self)
    }

    fn from_json(v: &serde_json::Value) -> Option<Self> {
        v.as_f64()
    }
}

impl Mass for BigRational {
    const EXACT: bool = true;

    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Numerator and denominator too large for f64: scale both down.
            let shift = self.denom().bits().max(self.numer().bits()).saturating_sub(1000);
            let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }

    fn from_json(v: &serde_json::Value) -> Option<Self> {
        match v {
            serde_json::Value::String(s) => parse_rational(s),
            serde_json::Value::Number(n) => n.as_u64().map(|x| Self::ratio(x, 1)),
            _ => None,
        }
    }
}

/// Parses `"a/b"` or `"a"`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let mut parts = s.trim().splitn(2, '/');
    let n: BigInt = parts.next()?.trim().parse().ok()?;
    let d: BigInt = match parts.next() {
        Some(d) => d.trim().parse().ok()?,
        None => BigInt::one(),
    };
    (!d.is_zero()).then(|| BigRational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_rationals_convert() {
        let big = BigRational::new(BigInt::one() << 3000u32, (BigInt::one() << 3001u32) + 1);
        assert!((Mass::to_f64(&big) - 0.5).abs() < 1e-12);
        assert_eq!(parse_rational("163/256"), Some(BigRational::ratio(163, 256)));
    }
}
