//! Homogeneous defining polynomials and diagonal holomorphic vector fields.
//!
//! Coefficients and field weights are exact rationals; numeric evaluation
//! (value, gradient, hessian) happens in double-precision complex arithmetic.

use num::traits::Zero;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rational::{rat_int, rat_to_f64, Rational};

/// One term of a homogeneous polynomial: coefficient times prod Z_i^{e_i}.
/// The coefficient is complex with exact-rational real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff_re: Rational,
    pub coeff_im: Rational,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn real(coeff: Rational, exponents: Vec<u32>) -> Self {
        Monomial { coeff_re: coeff, coeff_im: Rational::zero(), exponents }
    }

    pub fn degree(&self) -> usize {
        self.exponents.iter().map(|&e| e as usize).sum()
    }

    pub fn coeff_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.coeff_re), rat_to_f64(&self.coeff_im))
    }
}

/// Homogeneous polynomial F of degree d in the n+1 coordinates of CP^n.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPolynomial {
    pub n: usize,
    pub d: usize,
    pub monomials: Vec<Monomial>,
    /// Double-precision mirror of the monomials, for the numeric layer.
    pub(crate) numeric: Vec<(Complex64, Vec<u32>)>,
}

/// How much of the derivative data to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    Value,
    Gradient,
    Hessian,
}

/// Evaluation result; `grad` and `hess` are empty unless requested.
/// `abs_scale` is sum |coeff| * prod |Z_i|^{e_i}, the natural residual scale.
#[derive(Debug, Clone)]
pub struct EvalData {
    pub value: Complex64,
    pub grad: Vec<Complex64>,
    pub hess: Vec<Vec<Complex64>>,
    pub abs_scale: f64,
}

impl HomogeneousPolynomial {
    /// Validate a raw monomial list: merge duplicate exponent vectors, check
    /// homogeneity, degree range, and non-triviality.
    pub fn validate(raw: Vec<Monomial>, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("need n >= 1".into()));
        }
        let mut merged: Vec<Monomial> = Vec::new();
        let mut degree: Option<usize> = None;
        for m in raw {
            if m.exponents.len() != n + 1 {
                return Err(Error::Manifest(format!(
                    "exponent vector length {} != n+1 = {}",
                    m.exponents.len(),
                    n + 1
                )));
            }
            match degree {
                None => degree = Some(m.degree()),
                Some(d0) if d0 != m.degree() => {
                    return Err(Error::NonHomogeneous(d0, m.degree()))
                }
                _ => {}
            }
            if let Some(prev) = merged.iter_mut().find(|p| p.exponents == m.exponents) {
                prev.coeff_re += m.coeff_re;
                prev.coeff_im += m.coeff_im;
            } else {
                merged.push(m);
            }
        }
        merged.retain(|m| !m.coeff_re.is_zero() || !m.coeff_im.is_zero());
        if merged.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        let d = degree.unwrap();
        if d > n {
            return Err(Error::DegreeTooLarge { d, n });
        }
        if d == 0 {
            return Err(Error::Domain("degree must be positive".into()));
        }
        let numeric = merged.iter().map(|m| (m.coeff_c64(), m.exponents.clone())).collect();
        Ok(HomogeneousPolynomial { n, d, monomials: merged, numeric })
    }

    /// Evaluate F and its requested derivatives at an ambient point Z.
    pub fn eval_with_derivs(&self, z: &[Complex64], order: DerivOrder) -> EvalData {
        let nv = self.n + 1;
        debug_assert_eq!(z.len(), nv);
        let zero = Complex64::new(0.0, 0.0);
        let mut value = zero;
        let mut abs_scale = 0.0;
        let want_grad = order != DerivOrder::Value;
        let want_hess = order == DerivOrder::Hessian;
        let mut grad = if want_grad { vec![zero; nv] } else { Vec::new() };
        let mut hess = if want_hess { vec![vec![zero; nv]; nv] } else { Vec::new() };
        // Per-variable power tables, reused across the derivative loops.
        let mut pows: Vec<Vec<Complex64>> = vec![Vec::new(); nv];
        for (coeff, exps) in &self.numeric {
            for i in 0..nv {
                let e = exps[i] as usize;
                let tab = &mut pows[i];
                tab.clear();
                tab.push(Complex64::new(1.0, 0.0));
                for p in 0..e {
                    let last = tab[p];
                    tab.push(last * z[i]);
                }
            }
            let full: Complex64 = (0..nv).map(|i| pows[i][exps[i] as usize]).product();
            value += coeff * full;
            abs_scale += coeff.norm() * full.norm();
            if !want_grad {
                continue;
            }
            for k in 0..nv {
                let ek = exps[k];
                if ek == 0 {
                    continue;
                }
                let rest: Complex64 = (0..nv)
                    .filter(|&i| i != k)
                    .map(|i| pows[i][exps[i] as usize])
                    .product();
                grad[k] += coeff * (ek as f64) * pows[k][(ek - 1) as usize] * rest;
                if !want_hess {
                    continue;
                }
                // Diagonal second derivative.
                if ek >= 2 {
                    hess[k][k] +=
                        coeff * (ek as f64) * ((ek - 1) as f64) * pows[k][(ek - 2) as usize] * rest;
                }
                // Mixed second derivatives, upper triangle.
                for j in (k + 1)..nv {
                    let ej = exps[j];
                    if ej == 0 {
                        continue;
                    }
                    let rest2: Complex64 = (0..nv)
                        .filter(|&i| i != k && i != j)
                        .map(|i| pows[i][exps[i] as usize])
                        .product();
                    let contrib = coeff
                        * (ek as f64)
                        * (ej as f64)
                        * pows[k][(ek - 1) as usize]
                        * pows[j][(ej - 1) as usize]
                        * rest2;
                    hess[k][j] += contrib;
                    hess[j][k] += contrib;
                }
            }
        }
        EvalData { value, grad, hess, abs_scale }
    }
}

/// Diagonal holomorphic vector field X = sum lambda_i Z_i d/dZ_i tangent to
/// the hypersurface, with X F = kappa F.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalField {
    pub lambdas: Vec<Rational>,
    pub kappa: Rational,
    /// Double-precision mirror of the weights.
    pub lambdas_f64: Vec<f64>,
}

/// Compute the eigenvalue kappa = sum lambda_i e_i, checking that every
/// monomial of F yields the same exact value (tangency of X to M).
pub fn field_kappa(f: &HomogeneousPolynomial, lambdas: &[Rational]) -> Result<Rational> {
    if lambdas.len() != f.n + 1 {
        return Err(Error::Manifest(format!(
            "lambda vector length {} != n+1 = {}",
            lambdas.len(),
            f.n + 1
        )));
    }
    let mut kappa: Option<Rational> = None;
    for m in &f.monomials {
        let k: Rational = lambdas
            .iter()
            .zip(&m.exponents)
            .map(|(l, &e)| l * rat_int(e as i64))
            .sum();
        match &kappa {
            None => kappa = Some(k),
            Some(k0) if *k0 != k => {
                return Err(Error::NotTangent(k0.to_string(), k.to_string()))
            }
            _ => {}
        }
    }
    Ok(kappa.unwrap())
}

/// Project the weights to the trace-zero representative of the same
/// projective field: lambda_i' = lambda_i - s/(n+1), kappa' = kappa - s d/(n+1).
pub fn normalize_field(
    lambdas: &[Rational],
    d: usize,
    kappa: &Rational,
) -> (Vec<Rational>, Rational) {
    let s: Rational = lambdas.iter().sum();
    let shift = &s / rat_int(lambdas.len() as i64);
    let out = lambdas.iter().map(|l| l - &shift).collect();
    let kappa_out = kappa - &shift * rat_int(d as i64);
    (out, kappa_out)
}

impl DiagonalField {
    /// Build a field tangent to F from raw weights, without normalization.
    pub fn tangent_to(f: &HomogeneousPolynomial, lambdas: Vec<Rational>) -> Result<Self> {
        let kappa = field_kappa(f, &lambdas)?;
        let lambdas_f64 = lambdas.iter().map(rat_to_f64).collect();
        Ok(DiagonalField { lambdas, kappa, lambdas_f64 })
    }

    /// Trace-zero representative; boolean reports whether anything changed.
    pub fn normalized(&self, d: usize) -> (Self, bool) {
        let (lambdas, kappa) = normalize_field(&self.lambdas, d, &self.kappa);
        let changed = lambdas != self.lambdas;
        let lambdas_f64 = lambdas.iter().map(rat_to_f64).collect();
        (DiagonalField { lambdas, kappa, lambdas_f64 }, changed)
    }

    pub fn is_trace_zero(&self) -> bool {
        self.lambdas.iter().sum::<Rational>().is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn mono(c: i64, e: &[u32]) -> Monomial {
        Monomial::real(rat_int(c), e.to_vec())
    }

    /// The running example: F = Z0 Z1^2 + Z2^2 Z3 - Z2 Z3^2 in CP^3.
    pub(crate) fn cubic() -> HomogeneousPolynomial {
        HomogeneousPolynomial::validate(
            vec![
                mono(1, &[1, 2, 0, 0]),
                mono(1, &[0, 0, 2, 1]),
                mono(-1, &[0, 0, 1, 2]),
            ],
            3,
        )
        .unwrap()
    }

    #[test]
    fn validates_cubic() {
        let f = cubic();
        assert_eq!(f.d, 3);
        assert_eq!(f.monomials.len(), 3);
    }

    #[test]
    fn rejects_mixed_degrees() {
        let err = HomogeneousPolynomial::validate(
            vec![mono(1, &[2, 0, 0]), mono(1, &[0, 3, 0])],
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonHomogeneous(2, 3)));
    }

    #[test]
    fn rejects_degree_above_n() {
        let err =
            HomogeneousPolynomial::validate(vec![mono(1, &[4, 0, 0, 0])], 3).unwrap_err();
        assert!(matches!(err, Error::DegreeTooLarge { d: 4, n: 3 }));
    }

    #[test]
    fn merges_duplicates_and_rejects_zero() {
        let err = HomogeneousPolynomial::validate(
            vec![mono(1, &[1, 1, 0]), mono(-1, &[1, 1, 0])],
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ZeroPolynomial));
        let f = HomogeneousPolynomial::validate(
            vec![mono(1, &[1, 1, 0]), mono(2, &[1, 1, 0])],
            2,
        )
        .unwrap();
        assert_eq!(f.monomials.len(), 1);
        assert_eq!(f.monomials[0].coeff_re, rat_int(3));
    }

    #[test]
    fn eval_monomial_calculus() {
        let f = HomogeneousPolynomial::validate(vec![mono(1, &[1, 2, 0, 0])], 3).unwrap();
        let z = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(5.0, 0.0),
            Complex64::new(-3.0, 0.0),
        ];
        let e = f.eval_with_derivs(&z, DerivOrder::Hessian);
        assert_eq!(e.value, Complex64::new(4.0, 0.0));
        assert_eq!(e.grad[0], Complex64::new(4.0, 0.0));
        assert_eq!(e.grad[1], Complex64::new(4.0, 0.0));
        assert_eq!(e.hess[1][1], Complex64::new(2.0, 0.0));
        assert_eq!(e.hess[0][1], Complex64::new(4.0, 0.0));
    }

    fn random_point(seed: u64, nv: usize) -> Vec<Complex64> {
        // Cheap deterministic pseudo-random complex points for identity tests.
        let mut s = seed.wrapping_add(0x9E3779B97F4A7C15);
        let mut next = || {
            s ^= s >> 12;
            s ^= s << 25;
            s ^= s >> 27;
            (s.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..nv).map(|_| Complex64::new(next() * 4.0, next() * 4.0)).collect()
    }

    #[test]
    fn euler_identity_random_points() {
        let f = cubic();
        for s in 0..100 {
            let z = random_point(s, 4);
            let e = f.eval_with_derivs(&z, DerivOrder::Gradient);
            let lhs: Complex64 = z.iter().zip(&e.grad).map(|(zi, gi)| zi * gi).sum();
            let rhs = e.value * f.d as f64;
            assert!(
                (lhs - rhs).norm() <= 1e-12 * e.abs_scale.max(1.0) * f.d as f64,
                "seed {s}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn hessian_symmetry() {
        let f = cubic();
        for s in 0..20 {
            let z = random_point(s, 4);
            let e = f.eval_with_derivs(&z, DerivOrder::Hessian);
            for k in 0..4 {
                for j in 0..4 {
                    assert_eq!(e.hess[k][j], e.hess[j][k]);
                }
            }
        }
    }

    #[test]
    fn kappa_of_cubic_field() {
        let f = cubic();
        let lambdas = vec![rat_int(-7), rat_int(5), rat_int(1), rat_int(1)];
        assert_eq!(field_kappa(&f, &lambdas).unwrap(), rat_int(3));
        let x = DiagonalField::tangent_to(&f, lambdas).unwrap();
        assert!(x.is_trace_zero());
    }

    #[test]
    fn kappa_zero_cases() {
        let f = cubic();
        let zeros = vec![rat_int(0); 4];
        assert_eq!(field_kappa(&f, &zeros).unwrap(), rat_int(0));
        let q = HomogeneousPolynomial::validate(
            vec![mono(1, &[1, 1, 0, 0]), mono(1, &[0, 0, 1, 1])],
            3,
        )
        .unwrap();
        for t in [-3i64, 0, 4] {
            let l = vec![rat_int(1), rat_int(-1), rat_int(t), rat_int(-t)];
            assert_eq!(field_kappa(&q, &l).unwrap(), rat_int(0));
        }
    }

    #[test]
    fn kappa_rejects_non_tangent() {
        let f = cubic();
        let l = vec![rat_int(1), rat_int(0), rat_int(0), rat_int(0)];
        assert!(matches!(field_kappa(&f, &l), Err(Error::NotTangent(_, _))));
    }

    #[test]
    fn kappa_invariant_under_reordering() {
        let f = cubic();
        let g = HomogeneousPolynomial::validate(
            vec![
                mono(-1, &[0, 0, 1, 2]),
                mono(1, &[1, 2, 0, 0]),
                mono(1, &[0, 0, 2, 1]),
            ],
            3,
        )
        .unwrap();
        let l = vec![rat_int(-7), rat_int(5), rat_int(1), rat_int(1)];
        assert_eq!(field_kappa(&f, &l).unwrap(), field_kappa(&g, &l).unwrap());
    }

    #[test]
    fn normalize_projects_to_trace_zero() {
        let l = vec![rat_int(1); 5];
        let (l2, k2) = normalize_field(&l, 2, &rat_int(2));
        assert!(l2.iter().all(|x| x.is_zero()));
        assert!(k2.is_zero());

        let l = vec![rat_int(2), rat_int(0), rat_int(0), rat_int(0)];
        let (l2, k2) = normalize_field(&l, 3, &rat_int(1));
        assert_eq!(l2, vec![rat(3, 2), rat(-1, 2), rat(-1, 2), rat(-1, 2)]);
        assert_eq!(k2, rat_int(1) - rat(3, 2));
    }

    #[test]
    fn normalize_is_idempotent() {
        let l = vec![rat(1, 3), rat_int(4), rat(-2, 7), rat_int(0)];
        let (l1, k1) = normalize_field(&l, 3, &rat(5, 2));
        let (l2, k2) = normalize_field(&l1, 3, &k1);
        assert_eq!(l1, l2);
        assert_eq!(k1, k2);
        assert!(l1.iter().sum::<Rational>().is_zero());
    }
}
