//! Exact rational scalars.
//!
//! All exact quantities (kappa, the alpha coefficients, the closed-form
//! invariants) live in `Rational`, an arbitrary-precision reduced fraction.
//! Only the numeric integration layer converts to `f64`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::ToPrimitive;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Arbitrary-precision reduced fraction with positive denominator.
pub type Rational = BigRational;

/// Rational from an integer.
pub fn rat_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Rational from numerator and denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parse "a/b" or "a" into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    Rational::from_str(s.trim())
        .map_err(|e| Error::Manifest(format!("bad rational {s:?}: {e}")))
}

/// Render as "a/b", or "a" when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Lossy conversion for the numeric layer.
pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3", "-8", "-285/2", "22/7", "0"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), s);
        }
    }

    #[test]
    fn parse_reduces() {
        assert_eq!(parse_rational("4/6").unwrap(), rat(2, 3));
        assert_eq!(format_rational(&parse_rational("6/3").unwrap()), "2");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
    }

    #[test]
    fn f64_conversion() {
        assert_eq!(rat_to_f64(&rat(-285, 2)), -142.5);
    }
}
