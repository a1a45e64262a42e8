//! Shared hypersurface fixtures for unit and integration tests.

use crate::polynomial::{DiagonalField, HomogeneousPolynomial, Monomial};
use crate::rational::rat_int;

fn mono(c: i64, e: &[u32]) -> Monomial {
    Monomial::real(rat_int(c), e.to_vec())
}

/// F = Z0 Z1^2 + Z2^2 Z3 - Z2 Z3^2 in CP^3. The gradient vanishes at
/// [1:0:0:0], so the surface has one isolated singular point there; it is
/// smooth elsewhere, and it is the only fixture in the family that admits a
/// nontrivial tangent diagonal field (smooth hypersurfaces of degree >= 3
/// carry no holomorphic fields).
pub fn cubic() -> HomogeneousPolynomial {
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

/// Diagonal field tangent to the cubic, kappa = 3.
pub fn cubic_field() -> DiagonalField {
    let lambdas = [-7, 5, 1, 1].iter().map(|&v| rat_int(v)).collect();
    DiagonalField::tangent_to(&cubic(), lambdas).unwrap()
}

/// F = Z0 Z1 + Z2 Z3 in CP^3 (smooth quadric surface).
pub fn quadric_cp3() -> HomogeneousPolynomial {
    HomogeneousPolynomial::validate(vec![mono(1, &[1, 1, 0, 0]), mono(1, &[0, 0, 1, 1])], 3)
        .unwrap()
}

/// Field tangent to the quadric with kappa = 0.
pub fn quadric_cp3_field() -> DiagonalField {
    let lambdas = [1, -1, 2, -2].iter().map(|&v| rat_int(v)).collect();
    DiagonalField::tangent_to(&quadric_cp3(), lambdas).unwrap()
}

/// F = Z1 in CP^2: the hypersurface is a linearly embedded CP^1.
pub fn hyperplane_cp2() -> HomogeneousPolynomial {
    HomogeneousPolynomial::validate(vec![mono(1, &[0, 1, 0])], 2).unwrap()
}

/// Field tangent to the hyperplane, kappa = -2.
pub fn hyperplane_cp2_field() -> DiagonalField {
    let lambdas = [1, -2, 1].iter().map(|&v| rat_int(v)).collect();
    DiagonalField::tangent_to(&hyperplane_cp2(), lambdas).unwrap()
}
