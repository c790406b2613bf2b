//! Arithmetic backends for welfare evaluation.
//!
//! The evaluator is generic over [`WelfareScalar`]. Expressions built only
//! from field operations and integer powers run on [`Rational`] and compare
//! exactly; anything with `log`, `exp` or fractional powers runs on
//! [`HpFloat`], a 192-bit binary float.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode};
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::scalar::{format_rational, Rational};

/// Which arithmetic produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Exact,
    HighPrecision,
    Double,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::HighPrecision => "float192",
            Backend::Double => "f64",
        })
    }
}

/// Relative tolerance exponent for inexact comparisons: values `a`, `b` tie
/// when `|a - b| <= 2^FLOAT_TOLERANCE_LOG2 * max(1, |a|, |b|)`.
pub const FLOAT_TOLERANCE_LOG2: i32 = -64;

/// Significand bits of [`HpFloat`].
pub const HP_PRECISION: usize = 192;

pub trait WelfareScalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    const BACKEND: Backend;

    fn from_rational(r: &Rational) -> Self;

    /// Natural log of a positive value; `None` if the backend cannot.
    fn ln(&self) -> Option<Self>;

    fn exp(&self) -> Option<Self>;

    fn powi(&self, exponent: i32) -> Self;

    /// `self^p` for positive `self`; `None` if the backend cannot.
    fn powf(&self, p: &Rational) -> Option<Self>;

    fn is_finite_value(&self) -> bool {
        true
    }

    /// Three-way comparison, with ties decided by [`FLOAT_TOLERANCE_LOG2`]
    /// on inexact backends. The flag is set when a nonzero difference was
    /// absorbed by the tolerance.
    fn compare(&self, other: &Self) -> (Ordering, bool);
}

impl WelfareScalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn ln(&self) -> Option<Self> {
        None
    }

    fn exp(&self) -> Option<Self> {
        None
    }

    fn powi(&self, exponent: i32) -> Self {
        Pow::pow(self, exponent)
    }

    fn powf(&self, p: &Rational) -> Option<Self> {
        p.denom()
            .is_one()
            .then(|| p.to_i32().map(|e| self.powi(e)))
            .flatten()
    }

    fn compare(&self, other: &Self) -> (Ordering, bool) {
        (self.cmp(other), false)
    }
}

fn tolerant_compare<T>(a: &T, b: &T, abs: impl Fn(&T) -> T, scale: T) -> (Ordering, bool)
where
    T: PartialOrd + Clone + Sub<Output = T> + Mul<Output = T> + One,
{
    let exact = a.partial_cmp(b).unwrap_or(Ordering::Equal);
    if exact == Ordering::Equal {
        return (Ordering::Equal, false);
    }
    let mut bound = T::one();
    for v in [abs(a), abs(b)] {
        if v > bound {
            bound = v;
        }
    }
    let diff = abs(&(a.clone() - b.clone()));
    if diff <= bound * scale {
        (Ordering::Equal, true)
    } else {
        (exact, false)
    }
}

impl WelfareScalar for f64 {
    const BACKEND: Backend = Backend::Double;

    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn ln(&self) -> Option<Self> {
        Some(f64::ln(*self))
    }

    fn exp(&self) -> Option<Self> {
        Some(f64::exp(*self))
    }

    fn powi(&self, exponent: i32) -> Self {
        f64::powi(*self, exponent)
    }

    fn powf(&self, p: &Rational) -> Option<Self> {
        Some(f64::powf(*self, p.to_f64()?))
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn compare(&self, other: &Self) -> (Ordering, bool) {
        tolerant_compare(self, other, |v| v.abs(), 2f64.powi(FLOAT_TOLERANCE_LOG2))
    }
}

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

const RM: RoundingMode = RoundingMode::ToEven;

/// Binary floating point with [`HP_PRECISION`] significand bits.
#[derive(Clone, Debug)]
pub struct HpFloat(BigFloat);

impl HpFloat {
    pub fn from_f64(value: f64) -> Self {
        Self(BigFloat::from_f64(value, HP_PRECISION))
    }

    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    /// `2^exponent`.
    pub fn pow2(exponent: i32) -> Self {
        WelfareScalar::powi(&Self(BigFloat::from_u8(2, HP_PRECISION)), exponent)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_string().parse().unwrap_or(f64::NAN)
    }

    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }
}

impl PartialEq for HpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0.partial_cmp(&other.0) == Some(Ordering::Equal)
    }
}

impl PartialOrd for HpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Display for HpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for HpFloat {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0.add(&rhs.0, HP_PRECISION, RM))
    }
}

impl Sub for HpFloat {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0.sub(&rhs.0, HP_PRECISION, RM))
    }
}

impl Mul for HpFloat {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0.mul(&rhs.0, HP_PRECISION, RM))
    }
}

impl Div for HpFloat {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self(self.0.div(&rhs.0, HP_PRECISION, RM))
    }
}

impl Neg for HpFloat {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.neg())
    }
}

impl Zero for HpFloat {
    fn zero() -> Self {
        Self(BigFloat::from_u8(0, HP_PRECISION))
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for HpFloat {
    fn one() -> Self {
        Self(BigFloat::from_u8(1, HP_PRECISION))
    }
}

fn bigint_to_float(value: &num_bigint::BigInt) -> BigFloat {
    // Exact while the integer fits in the significand; rounded otherwise.
    CONSTS.with(|c| {
        BigFloat::parse(
            &value.to_string(),
            astro_float::Radix::Dec,
            HP_PRECISION,
            RM,
            &mut c.borrow_mut(),
        )
    })
}

impl WelfareScalar for HpFloat {
    const BACKEND: Backend = Backend::HighPrecision;

    fn from_rational(r: &Rational) -> Self {
        let fits = |v: &num_bigint::BigInt| v.bits() < 64;
        let to_float = |v: &num_bigint::BigInt| {
            if fits(v) {
                BigFloat::from_i64(v.to_i64().expect("checked width"), HP_PRECISION)
            } else {
                bigint_to_float(v)
            }
        };
        let numer = Self(to_float(r.numer()));
        if r.denom().is_one() {
            numer
        } else {
            numer / Self(to_float(r.denom()))
        }
    }

    fn ln(&self) -> Option<Self> {
        if self.0 == BigFloat::from_u8(1, HP_PRECISION) {
            return Some(Self::zero());
        }
        CONSTS.with(|c| Some(Self(self.0.ln(HP_PRECISION, RM, &mut c.borrow_mut()))))
    }

    fn exp(&self) -> Option<Self> {
        if self.0.is_zero() {
            return Some(Self::one());
        }
        CONSTS.with(|c| Some(Self(self.0.exp(HP_PRECISION, RM, &mut c.borrow_mut()))))
    }

    fn powi(&self, exponent: i32) -> Self {
        let magnitude = Self(
            self.0
                .powi(exponent.unsigned_abs() as usize, HP_PRECISION, RM),
        );
        if exponent < 0 {
            Self::one() / magnitude
        } else {
            magnitude
        }
    }

    fn powf(&self, p: &Rational) -> Option<Self> {
        if p.denom().is_one() {
            return p.to_i32().map(|e| self.powi(e));
        }
        // `BigFloat::pow` can spin when the result is exactly representable
        // (e.g. 4^(1/2)); going through ln/exp avoids exact intermediate results.
        if self.0.is_zero() || self.0 == BigFloat::from_u8(1, HP_PRECISION) {
            return Some(self.clone());
        }
        (self.ln()? * <Self as WelfareScalar>::from_rational(p)).exp()
    }

    fn is_finite_value(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    fn compare(&self, other: &Self) -> (Ordering, bool) {
        tolerant_compare(
            self,
            other,
            HpFloat::abs,
            HpFloat::pow2(FLOAT_TOLERANCE_LOG2),
        )
    }
}

/// A value in `[-inf, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Extended<S> {
    NegInfinity,
    Finite(S),
}

impl<S: WelfareScalar> Extended<S> {
    pub fn is_neg_infinity(&self) -> bool {
        matches!(self, Extended::NegInfinity)
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::NegInfinity => None,
        }
    }

    /// Three-way comparison with `-inf` as the bottom element.
    pub fn compare(&self, other: &Self) -> (Ordering, bool) {
        match (self, other) {
            (Extended::NegInfinity, Extended::NegInfinity) => (Ordering::Equal, false),
            (Extended::NegInfinity, Extended::Finite(_)) => (Ordering::Less, false),
            (Extended::Finite(_), Extended::NegInfinity) => (Ordering::Greater, false),
            (Extended::Finite(a), Extended::Finite(b)) => a.compare(b),
        }
    }
}

impl<S: fmt::Display> fmt::Display for Extended<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInfinity => f.write_str("-inf"),
            Extended::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// Extended-real welfare value tagged with the arithmetic that produced it.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtendedValue {
    NegInfinity,
    Finite(Number),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(HpFloat),
}

impl Number {
    pub fn to_hp(&self) -> HpFloat {
        match self {
            Number::Exact(r) => HpFloat::from_rational(r),
            Number::Float(x) => x.clone(),
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Number::Exact(r) => Some(r),
            Number::Float(_) => None,
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) => f.write_str(&format_rational(r)),
            Number::Float(x) => write!(f, "{x}"),
        }
    }
}

impl ExtendedValue {
    pub fn exact(value: Rational) -> Self {
        ExtendedValue::Finite(Number::Exact(value))
    }

    pub fn is_neg_infinity(&self) -> bool {
        matches!(self, ExtendedValue::NegInfinity)
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            ExtendedValue::Finite(n) => n.as_exact(),
            ExtendedValue::NegInfinity => None,
        }
    }

    /// Three-way comparison. Exact pairs compare exactly; anything involving
    /// a float compares at 192 bits under the relative tolerance. The flag
    /// reports that a nonzero difference was treated as a tie.
    pub fn compare(&self, other: &Self) -> (Ordering, bool) {
        match (self, other) {
            (ExtendedValue::NegInfinity, ExtendedValue::NegInfinity) => (Ordering::Equal, false),
            (ExtendedValue::NegInfinity, _) => (Ordering::Less, false),
            (_, ExtendedValue::NegInfinity) => (Ordering::Greater, false),
            (ExtendedValue::Finite(Number::Exact(a)), ExtendedValue::Finite(Number::Exact(b))) => {
                (a.cmp(b), false)
            }
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => a.to_hp().compare(&b.to_hp()),
        }
    }

    /// Three-way comparison without any tolerance.
    pub fn compare_strict(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtendedValue::Finite(Number::Exact(a)), ExtendedValue::Finite(Number::Exact(b))) => {
                a.cmp(b)
            }
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => {
                a.to_hp().partial_cmp(&b.to_hp()).unwrap_or(Ordering::Equal)
            }
            _ => self.compare(other).0,
        }
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::NegInfinity => f.write_str("-inf"),
            ExtendedValue::Finite(n) => write!(f, "{n}"),
        }
    }
}

impl From<Extended<Rational>> for ExtendedValue {
    fn from(value: Extended<Rational>) -> Self {
        match value {
            Extended::NegInfinity => ExtendedValue::NegInfinity,
            Extended::Finite(r) => ExtendedValue::Finite(Number::Exact(r)),
        }
    }
}

impl From<Extended<HpFloat>> for ExtendedValue {
    fn from(value: Extended<HpFloat>) -> Self {
        match value {
            Extended::NegInfinity => ExtendedValue::NegInfinity,
            Extended::Finite(x) => ExtendedValue::Finite(Number::Float(x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn hp_float_has_more_than_128_bits() {
        let third = HpFloat::from_rational(&ratio(1, 3));
        let back = third.clone() * HpFloat::from_rational(&int(3));
        let err = (back - HpFloat::one()).abs();
        assert!(err <= HpFloat::pow2(-180), "error {err}");
    }

    #[test]
    fn hp_ln_exp_round_trip() {
        let two = HpFloat::from_rational(&int(2));
        let round = two.ln().unwrap().exp().unwrap();
        assert_eq!(round.compare(&two).0, Ordering::Equal);
        assert!((round - two).abs() <= HpFloat::pow2(-150));
    }

    #[test]
    fn tolerance_absorbs_tiny_differences_only() {
        let one = HpFloat::one();
        let nudged = one.clone() + HpFloat::pow2(-80);
        assert_eq!(one.compare(&nudged), (Ordering::Equal, true));
        let pushed = one.clone() + HpFloat::pow2(-40);
        assert_eq!(one.compare(&pushed), (Ordering::Less, false));
    }

    #[test]
    fn neg_infinity_is_the_bottom() {
        let bottom = ExtendedValue::NegInfinity;
        let low = ExtendedValue::exact(int(-1_000_000));
        assert_eq!(bottom.compare(&low).0, Ordering::Less);
        assert_eq!(
            bottom.compare(&ExtendedValue::NegInfinity).0,
            Ordering::Equal
        );
    }

    #[test]
    fn mixed_backends_compare_in_float() {
        let exact = ExtendedValue::exact(ratio(1, 3));
        let float = ExtendedValue::Finite(Number::Float(HpFloat::from_rational(&ratio(1, 3))));
        assert_eq!(exact.compare(&float).0, Ordering::Equal);
    }

    #[test]
    fn big_integers_convert() {
        let big = Rational::from_integer(num_bigint::BigInt::from(10u8).pow(40u32));
        let x = HpFloat::from_rational(&big);
        assert!(x.to_f64() > 9.99e39 && x.to_f64() < 1.01e40);
    }
}
