//! Number types the solvers run on.
//!
//! Every algorithm in this crate is generic over [`Scalar`]. Two
//! implementations exist: [`Rational`] (arbitrary precision, every
//! comparison exact) and `f64` (comparisons against a [`Tolerance`]).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational numbers.
pub type Rational = BigRational;

/// Comparison slack used in float mode. Exact arithmetic ignores it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(pub f64);

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance(1e-9);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::DEFAULT
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
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
    /// True when arithmetic and comparisons are exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_ratio(numer: i64, denom: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Parses `"3"`, `"-0.25"`, `"1e-3"` or `"p/q"`.
    fn parse(text: &str) -> Option<Self>;
    /// Converts a double. Exact mode takes the binary value of `x` verbatim.
    fn from_f64(x: f64) -> Option<Self>;
    fn is_finite(&self) -> bool;

    /// Sign of `self`, treating `|self| <= tol` as zero in float mode.
    fn sign(&self, tol: Tolerance) -> Ordering;

    /// `self -= a * b`, the inner update of every pivot.
    fn sub_mul_assign(&mut self, a: &Self, b: &Self);
    fn div_assign_ref(&mut self, d: &Self);
    fn add_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;

    fn is_zero_tol(&self, tol: Tolerance) -> bool {
        self.sign(tol) == Ordering::Equal
    }
    fn is_pos(&self, tol: Tolerance) -> bool {
        self.sign(tol) == Ordering::Greater
    }
    fn is_neg(&self, tol: Tolerance) -> bool {
        self.sign(tol) == Ordering::Less
    }
    fn abs_val(&self) -> Self {
        if self.is_neg(Tolerance(0.0)) {
            -self.clone()
        } else {
            self.clone()
        }
    }
    /// `self == other` up to the tolerance.
    fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        (self.clone() - other.clone()).is_zero_tol(tol)
    }
    /// Tolerance scaled by `1 + |reference|`, used for objective comparisons.
    fn rel_tol(reference: &Self, tol: Tolerance) -> Tolerance {
        if Self::EXACT {
            tol
        } else {
            Tolerance(tol.0 * (1.0 + reference.to_f64().abs()))
        }
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
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn parse(text: &str) -> Option<Self> {
        parse_rational(text)
    }
    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn sign(&self, _tol: Tolerance) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self -= a * b;
    }
    fn div_assign_ref(&mut self, d: &Self) {
        *self /= d;
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
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
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn parse(text: &str) -> Option<Self> {
        if text.contains('/') {
            return None;
        }
        f64::from_str(text.trim()).ok().filter(|v| v.is_finite())
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn sign(&self, tol: Tolerance) -> Ordering {
        if *self > tol.0 {
            Ordering::Greater
        } else if *self < -tol.0 {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn div_assign_ref(&mut self, d: &Self) {
        *self /= d;
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
}

/// Parses a decimal (`-1.25`, `3e-2`) or a fraction (`7/12`) exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim()).ok()?;
        let den = BigInt::from_str(den.trim()).ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], i64::from_str(&text[pos + 1..]).ok()?),
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
    if exponent.unsigned_abs() > 4096 {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&all_digits).ok()?);
    let shift = exponent - frac_part.len() as i64;
    let ten = BigRational::from_integer(BigInt::from(10));
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Some(if negative { -value } else { value })
}

/// Converts between scalar types through the textual or f64 representation.
pub fn rational_to<S: Scalar>(q: &Rational) -> S {
    if S::EXACT {
        S::parse(&q.to_string()).expect("rational renders as p/q")
    } else {
        S::from_f64(Scalar::to_f64(q)).unwrap_or_else(S::zero)
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (u, v)| acc + u.mul_ref(v))
}

pub fn sum<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> S {
    values.into_iter().fold(S::zero(), |acc, v| acc.add_ref(v))
}
