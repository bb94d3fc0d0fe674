//! Number types the engine runs on.
//!
//! Every algorithm is generic over [`Scalar`]. Two implementations exist:
//! exact rationals ([`Rational`]) for small models and cross-checks, and `f64`
//! for lattice-scale runs. Comparisons that decide the combinatorial structure
//! (merging breakpoints, collinearity, feasibility) go through the tolerant
//! helpers on the trait, which are exact for rationals and use a relative
//! tolerance of `1e-9` for floats.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Rational = BigRational;

/// Relative tolerance used by the floating point mode.
pub const FLOAT_TOL: f64 = 1e-9;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact for rationals (the binary value of `v` is kept).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn from_rational(r: &Rational) -> Self;
    /// Exact value; `None` for infinities and NaN.
    fn to_rational(&self) -> Option<Rational>;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Absolute slack allowed when comparing values of magnitude `scale`.
    fn slack(scale: &Self) -> Self;

    /// `a == b` up to the mode's tolerance.
    fn near(a: &Self, b: &Self) -> bool {
        if Self::EXACT {
            return a == b;
        }
        let scale = max_abs(a, b);
        (a.clone() - b.clone()).abs() <= Self::slack(&scale)
    }

    /// `a <= b` up to the mode's tolerance.
    fn le_tol(a: &Self, b: &Self) -> bool {
        if Self::EXACT {
            return a <= b;
        }
        let scale = max_abs(a, b);
        a.clone() - b.clone() <= Self::slack(&scale)
    }

    /// `a < b` by more than the mode's tolerance.
    fn lt_strict(a: &Self, b: &Self) -> bool {
        !Self::le_tol(b, a)
    }

    /// Parses a decimal (`"0.005"`, `"-3"`) or fraction (`"6/5"`) literal.
    fn parse_literal(text: &str) -> Option<Self>;

    fn is_zero_value(&self) -> bool {
        *self == Self::zero()
    }
}

fn max_abs<S: Scalar>(a: &S, b: &S) -> S {
    let (a, b) = (a.abs(), b.abs());
    if a > b {
        a
    } else {
        b
    }
}

pub(crate) fn min_of<S: Scalar>(a: &S, b: &S) -> S {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub(crate) fn max_of<S: Scalar>(a: &S, b: &S) -> S {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> Option<Rational> {
        BigRational::from_float(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn slack(scale: &Self) -> Self {
        FLOAT_TOL * scale.max(1.0)
    }
    fn parse_literal(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            if d == 0.0 {
                return None;
            }
            return Some(n / d);
        }
        text.parse().ok()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn slack(_scale: &Self) -> Self {
        Zero::zero()
    }
    fn parse_literal(text: &str) -> Option<Self> {
        parse_exact_decimal(text.trim())
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// Exact parse of `"-12.0625"`, `"3"`, `"1e-2"` or `"6/5"`.
pub fn parse_exact_decimal(text: &str) -> Option<Rational> {
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_exact_decimal(n.trim())?;
        let d = parse_exact_decimal(d.trim())?;
        if Zero::is_zero(&d) {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if joined.is_empty() { "0" } else { &joined }).ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Shorthand for building exact rationals in tests and fixtures.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}
