//! Scalar abstraction shared by the model, the measures and the linear algebra.
//!
//! Everything that only needs field arithmetic and an order is written against
//! [`Scalar`], so the same code runs exactly on [`Rational`] and fast on `f64`.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational, the exact scalar.
pub type Rational = BigRational;

/// 2^64 as a `u128`; the upper end of the sampling threshold scale.
pub const UNIT_SCALE: u128 = 1u128 << 64;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// Whether `==` on this type is mathematically meaningful.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// `ceil(self * 2^64)` clamped into `[0, 2^64]`.
    ///
    /// A uniform `u: u64` satisfies `u < t` with probability `t / 2^64`, so this
    /// turns a probability into an integer comparison.
    fn unit_threshold(&self) -> u128;

    /// Size of the representation in bits; zero for fixed-width floats.
    fn repr_bits(&self) -> u64 {
        0
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_rational(r: &Rational) -> Self {
                ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn unit_threshold(&self) -> u128 {
                let v = *self as f64;
                if v.is_nan() || v <= 0.0 {
                    0
                } else if v >= 1.0 {
                    UNIT_SCALE
                } else {
                    // multiplication by a power of two is exact
                    (v * 18_446_744_073_709_551_616.0).ceil() as u128
                }
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn unit_threshold(&self) -> u128 {
        if !self.is_positive() {
            return 0;
        }
        if *self >= Rational::one() {
            return UNIT_SCALE;
        }
        let scaled: BigInt = self.numer() << 64u32;
        let den = self.denom();
        let (q, r) = (&scaled / den, &scaled % den);
        let q = if r.is_zero() { q } else { q + 1 };
        q.to_u128().unwrap_or(UNIT_SCALE).min(UNIT_SCALE)
    }

    fn repr_bits(&self) -> u64 {
        self.denom().bits()
    }
}

/// `numer/denom` as a rational. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if s.contains('/') || frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{whole_digits}{frac}");
        let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(numer, denom);
        return Some(if negative { -r } else { r });
    }
    let r = Rational::from_str(s).ok()?;
    Some(r)
}

/// Exact `p/q` rendering; integers keep their `/1` so every exact field has one shape.
pub fn fmt_exact(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Rational approximation of a float, used for the numeric stand-in of irrational points.
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_are_ceilings() {
        assert_eq!(rat(1, 2).unit_threshold(), UNIT_SCALE / 2);
        assert_eq!(int(0).unit_threshold(), 0);
        assert_eq!(int(1).unit_threshold(), UNIT_SCALE);
        // 2^64 / 3 is not an integer, so the ceiling rounds up
        assert_eq!(rat(1, 3).unit_threshold(), UNIT_SCALE / 3 + 1);
        assert_eq!(0.5f64.unit_threshold(), UNIT_SCALE / 2);
        assert_eq!(1.0f64.unit_threshold(), UNIT_SCALE);
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/9"), Some(rat(1, 9)));
        assert_eq!(parse_rational(" -3 "), Some(int(-3)));
        assert_eq!(parse_rational("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(rat(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1."), None);
    }

    #[test]
    fn exact_format_keeps_denominator() {
        assert_eq!(fmt_exact(&int(1)), "1/1");
        assert_eq!(fmt_exact(&rat(2, 6)), "1/3");
        assert_eq!(fmt_exact(&int(0)), "0/1");
    }
}
