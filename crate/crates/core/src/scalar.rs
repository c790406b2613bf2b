//! Utility scalars.
//!
//! Profiles, allocations and the fairness checks are generic over a
//! [`Utility`] type. The exact instantiation uses [`Rational`]
//! (arbitrary-precision, always in lowest terms); `f64` is provided for
//! quick experiments where exactness does not matter, and `f32` alongside it.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};
use thiserror::Error;

/// Exact nonnegative-or-signed rational with arbitrary precision.
pub type Rational = BigRational;

/// A per-good utility value.
///
/// The arithmetic comes from `num-traits`; the extra methods bridge to the
/// exact rational world used by welfare evaluation and reports.
pub trait Utility:
    Num + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Arithmetic on this type is exact (no rounding).
    const EXACT: bool;

    /// Exact rational value of `self`.
    fn to_rational(&self) -> Rational;

    /// Nearest representable value of `r`.
    fn from_rational(r: &Rational) -> Self;

    fn is_negative_value(&self) -> bool {
        *self < Self::zero()
    }

    fn is_positive_value(&self) -> bool {
        *self > Self::zero()
    }

    /// Exact text form, `p/q` or an integer.
    fn render(&self) -> String {
        format_rational(&self.to_rational())
    }
}

impl Utility for Rational {
    const EXACT: bool = true;

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

impl Utility for f64 {
    const EXACT: bool = false;

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }

    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
}

impl Utility for f32 {
    const EXACT: bool = false;

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }

    fn from_rational(r: &Rational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational {text:?}: {reason}")]
pub struct RationalParseError {
    pub text: String,
    pub reason: &'static str,
}

/// Parses `"p/q"` or an integer string into a rational in lowest terms.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let err = |reason| RationalParseError {
        text: text.to_string(),
        reason,
    };
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(err("empty"));
    }
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (trimmed, None),
    };
    let num = parse_integer(num).ok_or_else(|| err("numerator is not an integer"))?;
    let den = match den {
        Some(d) => parse_integer(d).ok_or_else(|| err("denominator is not an integer"))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

fn parse_integer(text: &str) -> Option<BigInt> {
    let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(text.strip_prefix('+').unwrap_or(text)).ok()
}

/// Renders a rational exactly: `"p/q"`, or `"p"` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses a comma-separated list of rationals (`"1,2,1/2"`).
pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>, RationalParseError> {
    text.split(',').map(parse_rational).collect()
}

pub fn format_rational_list(values: &[Rational]) -> String {
    let parts: Vec<String> = values.iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}

/// Shorthand used throughout tests and the lab.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub(crate) fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("4/8").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" -6/4 ").unwrap(), ratio(-3, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "a", "1.5", "1/", "/2", "1/2/3", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn formats_in_lowest_terms() {
        assert_eq!(format_rational(&ratio(6, 4)), "3/2");
        assert_eq!(format_rational(&int(7)), "7");
        assert_eq!(format_rational(&ratio(0, 5)), "0");
    }

    #[test]
    fn float_utility_round_trips_dyadics() {
        let half = 0.5_f64;
        assert_eq!(half.to_rational(), ratio(1, 2));
        assert_eq!(f64::from_rational(&ratio(3, 4)), 0.75);
        assert_eq!(f32::from_rational(&ratio(3, 4)), 0.75);
        assert_eq!(0.25_f32.to_rational(), ratio(1, 4));
    }
}
