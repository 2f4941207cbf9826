//! Scalar abstraction over the two numeric modes: `f64` for simulation
//! throughput and `BigRational` for exact golden-value computation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait WinScalar:
    Clone
    + PartialEq
    + PartialOrd
    + std::fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic in this mode is exact (no rounding).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_count(n: u64) -> Self;
    fn ratio(num: u64, den: u64) -> Self;
    fn from_big_rational(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    fn abs(self) -> Self;

    /// Sum in a fixed, caller-determined order. The float mode uses
    /// compensated (Kahan) summation so results are run-to-run stable.
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self;
}

impl WinScalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_count(n: u64) -> Self {
        n as f64
    }
    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }
    fn from_big_rational(r: &BigRational) -> Self {
        big_rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut total = 0.0;
        let mut comp = 0.0;
        for x in iter {
            let y = x - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        }
        total
    }
}

impl WinScalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_big_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        big_rational_to_f64(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs(self) -> Self {
        Signed::abs(&self)
    }

    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Zero::zero(), |acc: BigRational, x| acc + x)
    }
}

/// Convert a `BigRational` to `f64`. Handles numerators/denominators far
/// outside `f64` range by rescaling with powers of two before dividing.
pub fn big_rational_to_f64(r: &BigRational) -> f64 {
    if Zero::is_zero(r) {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift the numerator so the integer quotient carries ~64 significant
    // bits, then undo the shift in the exponent.
    let numer = r.numer();
    let denom = r.denom();
    let shift = denom.bits() as i64 - numer.bits() as i64 + 64;
    let scaled = if shift >= 0 {
        (numer << shift as u64) / denom
    } else {
        numer / (denom << (-shift) as u64)
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-shift as i32)
}

/// Parse a decimal or fraction literal (e.g. `"0.45"`, `"9/20"`, `"3"`) into
/// an exact rational.
pub fn parse_exact_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n = parse_exact_rational(num)?;
        let d = parse_exact_rational(den)?;
        if Zero::is_zero(&d) {
            return None;
        }
        return Some(n / d);
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        let digits = format!(
            "{}{}",
            if int_part.is_empty() { "0" } else { int_part },
            frac_part
        );
        let n: BigInt = digits.parse().ok()?;
        let d = BigInt::from(10u32).pow(frac_part.len() as u32);
        return Some(BigRational::new(n, d));
    }
    let n: BigInt = text.parse().ok()?;
    Some(BigRational::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_strings_exactly() {
        let r = parse_exact_rational("0.45").unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(9), BigInt::from(20)));
        let r = parse_exact_rational("9/20").unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(9), BigInt::from(20)));
        let r = parse_exact_rational("-1.5").unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(-3), BigInt::from(2)));
        assert!(parse_exact_rational("1/0").is_none());
    }

    #[test]
    fn kahan_sum_matches_exact_on_small_inputs() {
        let xs = [0.1f64; 10];
        let total = <f64 as WinScalar>::sum(xs.iter().copied());
        assert!((total - 1.0).abs() < 1e-15);
    }
}
