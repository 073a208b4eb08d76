//! Numeric types that cost arithmetic can be carried out in.

use std::fmt::Debug;

use num_rational::Rational64;
use num_traits::{Num, ToPrimitive};

/// A number type usable for cost sums: `f32`, `f64`, or exact [`Rational64`].
pub trait CostScalar: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// Converts an exact unit cost into this representation.
    fn from_exact(value: Rational64) -> Self;

    fn from_count(count: u64) -> Self;

    fn to_f64(self) -> f64;
}

/// Correctly rounded for the small numerators and denominators unit costs use.
fn ratio_to_f64(value: Rational64) -> f64 {
    let (numer, denom) = (*value.numer(), *value.denom());
    const EXACT: i64 = 1 << 53;
    if numer.unsigned_abs() < EXACT as u64 && denom < EXACT {
        numer as f64 / denom as f64
    } else {
        ToPrimitive::to_f64(&value).unwrap_or(f64::NAN)
    }
}

impl CostScalar for f64 {
    fn from_exact(value: Rational64) -> Self {
        ratio_to_f64(value)
    }

    fn from_count(count: u64) -> Self {
        count as f64
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl CostScalar for f32 {
    fn from_exact(value: Rational64) -> Self {
        ratio_to_f64(value) as f32
    }

    fn from_count(count: u64) -> Self {
        count as f32
    }

    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

impl CostScalar for Rational64 {
    fn from_exact(value: Rational64) -> Self {
        value
    }

    fn from_count(count: u64) -> Self {
        Rational64::from_integer(i64::try_from(count).unwrap_or(i64::MAX))
    }

    fn to_f64(self) -> f64 {
        ratio_to_f64(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_to_float_is_nearest() {
        let v = Rational64::new(198_704, 10_000);
        assert_eq!(f64::from_exact(v), 19.8704);
        assert_eq!(CostScalar::to_f64(v), 19.8704);
        assert_eq!(f32::from_exact(v), 19.8704_f32);
    }

    #[test]
    fn counts() {
        assert_eq!(Rational64::from_count(7), Rational64::from_integer(7));
        assert_eq!(f64::from_count(3), 3.0);
    }
}
