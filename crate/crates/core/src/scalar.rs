//! Numeric abstractions.
//!
//! Deployment costs are carried by a [`Scalar`], which is exact for
//! [`Rational64`](num_rational::Rational64) (the default everywhere) and
//! approximate for `f64`/`f32`. The LP relaxation and the max-flow separation
//! oracle run on an [`LpFloat`].

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, NumAssign, ToPrimitive};

/// Cost scalar used by instances, designs and the combinatorial solvers.
pub trait Scalar:
    Num + Clone + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Parses a JSON number.
    ///
    /// Exact scalars read the shortest decimal form, so `0.1` becomes `1/10`.
    fn from_json(n: &serde_json::Number) -> Option<Self>;

    /// Renders the value as a JSON number. Integral values are written
    /// without a fractional part.
    fn to_json(&self) -> serde_json::Number;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the scalar type")
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for Ratio<i64> {
    fn from_json(n: &serde_json::Number) -> Option<Self> {
        if let Some(i) = n.as_i64() {
            return Some(Ratio::from_integer(i));
        }
        parse_decimal(&n.to_string())
    }

    fn to_json(&self) -> serde_json::Number {
        if self.is_integer() {
            return serde_json::Number::from(self.to_integer());
        }
        let value = *self.numer() as f64 / *self.denom() as f64;
        serde_json::Number::from_f64(value).expect("finite rational")
    }
}

macro_rules! impl_float_scalar {
    ($ty:ty) => {
        impl Scalar for $ty {
            fn from_json(n: &serde_json::Number) -> Option<Self> {
                n.as_f64().map(|v| v as $ty).filter(|v| v.is_finite())
            }

            fn to_json(&self) -> serde_json::Number {
                if self.fract() == 0.0 && self.abs() < 9.0e15 {
                    serde_json::Number::from(*self as i64)
                } else {
                    serde_json::Number::from_f64(*self as f64).expect("finite cost")
                }
            }
        }
    };
}

impl_float_scalar!(f64);
impl_float_scalar!(f32);

/// Exact parse of a decimal literal such as `-12.5e-3`.
fn parse_decimal(text: &str) -> Option<Ratio<i64>> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    let mut numer: i64 = digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let pow = 10i64.checked_pow(scale.unsigned_abs())?;
    if scale >= 0 {
        Some(Ratio::from_integer(numer.checked_mul(pow)?))
    } else {
        Some(Ratio::new(numer, pow))
    }
}

/// Floating-point type used by the LP relaxation and max-flow.
pub trait LpFloat: Float + NumAssign + FromPrimitive + Debug + Display + Send + Sync + 'static {
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("representable constant")
    }
}

impl LpFloat for f64 {}
impl LpFloat for f32 {}
