//! JSON manifest schema: a hypersurface polynomial with exact rational
//! coefficients plus a diagonal field, as consumed by the CLI and tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{DiagonalField, HomogeneousPolynomial, Monomial};
use crate::rational::{parse_rational, Rational};

/// Coefficient entry: either a plain rational string ("-3/2") for a real
/// coefficient, or explicit rational real/imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CoeffRepr {
    Real(String),
    Complex { re: String, im: String },
}

impl CoeffRepr {
    pub fn to_rationals(&self) -> Result<(Rational, Rational)> {
        match self {
            CoeffRepr::Real(s) => Ok((parse_rational(s)?, crate::rational::rat_int(0))),
            CoeffRepr::Complex { re, im } => Ok((parse_rational(re)?, parse_rational(im)?)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestMonomial {
    pub coefficient: CoeffRepr,
    pub exponents: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldSection {
    pub lambda: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub n: usize,
    pub polynomial: Vec<ManifestMonomial>,
    pub field: FieldSection,
}

impl Manifest {
    pub fn from_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    /// Validate into the exact polynomial and the raw (un-normalized)
    /// tangent field.
    pub fn build(&self) -> Result<(HomogeneousPolynomial, DiagonalField)> {
        let monomials: Vec<Monomial> = self
            .polynomial
            .iter()
            .map(|m| {
                let (coeff_re, coeff_im) = m.coefficient.to_rationals()?;
                Ok(Monomial { coeff_re, coeff_im, exponents: m.exponents.clone() })
            })
            .collect::<Result<_>>()?;
        let f = HomogeneousPolynomial::validate(monomials, self.n)?;
        let lambdas: Vec<Rational> = self
            .field
            .lambda
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<_>>()?;
        let field = DiagonalField::tangent_to(&f, lambdas)?;
        Ok((f, field))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat_int, rat_to_f64};

    const CUBIC: &str = r#"{
        "n": 3,
        "polynomial": [
            {"coefficient": "1", "exponents": [1, 2, 0, 0]},
            {"coefficient": "1", "exponents": [0, 0, 2, 1]},
            {"coefficient": "-1", "exponents": [0, 0, 1, 2]}
        ],
        "field": {"lambda": ["-7", "5", "1", "1"]}
    }"#;

    #[test]
    fn parses_cubic_manifest() {
        let man = Manifest::from_str(CUBIC).unwrap();
        let (f, field) = man.build().unwrap();
        assert_eq!(f.n, 3);
        assert_eq!(f.d, 3);
        assert_eq!(field.kappa, rat_int(3));
        assert!(field.is_trace_zero());
    }

    #[test]
    fn complex_coefficients_parse() {
        let text = r#"{
            "n": 2,
            "polynomial": [
                {"coefficient": {"re": "1/2", "im": "-1"}, "exponents": [1, 0, 0]}
            ],
            "field": {"lambda": ["0", "1", "-1"]}
        }"#;
        let man = Manifest::from_str(text).unwrap();
        let (f, _field) = man.build().unwrap();
        let c = f.monomials[0].coeff_c64();
        assert!((c.re - 0.5).abs() < 1e-15 && (c.im + 1.0).abs() < 1e-15);
        assert!((rat_to_f64(&f.monomials[0].coeff_im) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_untangent_field() {
        let text = r#"{
            "n": 3,
            "polynomial": [
                {"coefficient": "1", "exponents": [1, 2, 0, 0]},
                {"coefficient": "1", "exponents": [0, 0, 2, 1]}
            ],
            "field": {"lambda": ["1", "2", "3", "4"]}
        }"#;
        let man = Manifest::from_str(text).unwrap();
        assert!(man.build().is_err());
    }

    #[test]
    fn rejects_bad_json() {
        assert!(Manifest::from_str("{").is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let man = Manifest::from_str(CUBIC).unwrap();
        let text = serde_json::to_string(&man).unwrap();
        let back = Manifest::from_str(&text).unwrap();
        assert_eq!(man, back);
    }
}
