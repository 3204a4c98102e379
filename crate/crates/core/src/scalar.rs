//! Arithmetic backends.
//!
//! Every classifier is written once against [`Scalar`] and runs either in
//! binary64 (`f64`) or in exact rational arithmetic ([`Rational`]).

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

/// Sign of a value after zero-snapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    /// `(-1)^n` as a sign.
    pub fn alternating(n: usize) -> Sign {
        if n % 2 == 0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

pub trait Scalar:
    Clone + Debug + PartialOrd + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True for backends without rounding error.
    const EXACT: bool;

    /// Nearest binary64 value.
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Conversion from a binary64 value, exact for [`Rational`].
    fn from_f64_value(value: f64) -> Result<Self>;

    fn is_finite_value(&self) -> bool;

    /// Sign of `self` after treating `|self| <= eps` as zero.
    fn snapped_sign(&self, eps: f64) -> Sign;

    fn floor_value(&self) -> Self;

    /// `exp(self)` when representable in this backend.
    fn exp_value(&self) -> Result<Self>;

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize fits every backend")
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64_value(value: f64) -> Result<Self> {
        Ok(value)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn snapped_sign(&self, eps: f64) -> Sign {
        if self.abs() <= eps {
            Sign::Zero
        } else if *self > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    fn floor_value(&self) -> Self {
        self.floor()
    }

    fn exp_value(&self) -> Result<Self> {
        Ok(self.exp())
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_f64_value(value: f64) -> Result<Self> {
        BigRational::from_float(value).ok_or_else(|| Error::Inexact(format!("{value} is not finite")))
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    fn snapped_sign(&self, eps: f64) -> Sign {
        let zero = if eps <= 0.0 {
            self.is_zero()
        } else {
            match BigRational::from_float(eps) {
                Some(e) => self.abs() <= e,
                None => true,
            }
        };
        if zero {
            Sign::Zero
        } else if self.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    fn floor_value(&self) -> Self {
        self.floor()
    }

    fn exp_value(&self) -> Result<Self> {
        if self.is_zero() {
            Ok(BigRational::from_integer(BigInt::from(1)))
        } else {
            Err(Error::Inexact(format!("exp({self}) is irrational")))
        }
    }
}

/// Parses `"num/den"`, `"num"` or a decimal literal into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad numerator in {text:?}")))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad denominator in {text:?}")))?;
        if den.is_zero() {
            return Err(Error::Domain(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Ok(int) = text.parse::<BigInt>() {
        return Ok(BigRational::from_integer(int));
    }
    // Decimal literal: 1.25 -> 125/100, 2.5e-3 -> 25/10000.
    let (mantissa, exponent) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (
            m,
            e.parse::<i32>()
                .map_err(|_| Error::Domain(format!("bad exponent in {text:?}")))?,
        ),
        None => (text, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| Error::Domain(format!("not a number: {text:?}")))?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Builds `num/den` from machine integers.
pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-2").unwrap(), ratio(-2, 1));
        assert_eq!(parse_rational("1.25").unwrap(), ratio(5, 4));
        assert_eq!(parse_rational("2.5e-3").unwrap(), ratio(1, 400));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn snapping() {
        assert_eq!(1e-13_f64.snapped_sign(1e-12), Sign::Zero);
        assert_eq!((-1e-11_f64).snapped_sign(1e-12), Sign::Negative);
        assert_eq!(ratio(-1, 1000).snapped_sign(0.0), Sign::Negative);
        assert_eq!(ratio(-1, 1000).snapped_sign(0.01), Sign::Zero);
    }

    #[test]
    fn float_to_rational_is_exact() {
        let r = Rational::from_f64_value(0.1).unwrap();
        assert_eq!(r.approx(), 0.1);
        assert_ne!(r, ratio(1, 10));
    }
}
