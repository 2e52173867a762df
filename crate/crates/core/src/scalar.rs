//! Scalar abstractions.
//!
//! The symbolic layer ([`TrigField`](crate::TrigField), brackets, spans) is
//! written against [`Scalar`], which is satisfied by exact rationals as well
//! as by `f32`/`f64`. Rank and membership decisions are only meaningful for
//! exact scalars; the numerical layer (flows, planning) is written against
//! [`Real`].

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, One, ToPrimitive, Zero};

/// Arbitrary precision rational number used by the exact layer.
pub type Rational = BigRational;

/// Coefficient type of a trigonometric field.
pub trait Scalar:
    Clone + Debug + PartialEq + Num + Neg<Output = Self> + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("every scalar type represents small integers")
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    /// Lossy conversion used at the floating point boundary.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Clone + Debug + PartialEq + Num + Neg<Output = T> + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Floating point type used by the numerical layer.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + Default + 'static {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    fn two_pi() -> Self {
        Self::lit(std::f64::consts::TAU)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rint(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.25"` exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Ok(r) = s.parse::<BigRational>() {
        if !r.denom().is_zero() {
            return Some(r);
        }
        return None;
    }
    // decimal notation
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    x.iter()
        .zip(y)
        .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

pub(crate) fn dot_int<S: Scalar>(m: &[i64], v: &[S]) -> S {
    m.iter()
        .zip(v)
        .fold(S::zero(), |acc, (&k, x)| acc + S::from_int(k) * x.clone())
}

pub(crate) fn is_zero_vec<S: Scalar>(v: &[S]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub(crate) fn norm_f64<S: Scalar>(v: &[S]) -> f64 {
    v.iter()
        .map(|x| {
            let x = x.to_f64_lossy();
            x * x
        })
        .sum::<f64>()
        .sqrt()
}
