//! Bando-Futaki invariants of projective hypersurfaces.
//!
//! Three independent routes to the invariants of M = {F = 0} in CP^n with a
//! tangent diagonal holomorphic field: an exact closed form, an exact
//! coefficient recurrence, and Monte Carlo integration of curvature
//! integrands over the hypersurface itself. The pointwise geometry layer
//! also verifies the differential identities the closed forms rest on.

pub mod combinatorics;
pub mod error;
pub mod fixtures;
pub mod forms;
pub mod geometry;
pub mod identity;
pub mod invariants;
pub mod manifest;
pub mod montecarlo;
pub mod polynomial;
pub mod rational;
pub mod report;

pub use combinatorics::{
    alpha_closed, alpha_table, bando_futaki_closed, bando_futaki_coeff_route, binomial,
    futaki_first, AlphaTable,
};
pub use error::{Error, Result};
pub use geometry::{
    curvature_fd, fiber_roots, frame_at, resolve_root, ChartPoint, GeometryFrame,
};
pub use forms::{
    chern_direct, chern_newton, polarization_nabla_x, trace_power, CurvatureMatrix, FormPQ,
};
pub use identity::{run_identity_suite, IdentityResiduals};
pub use invariants::{
    calibrate, chen_tian, futaki_numeric, futaki_report, kenergy, kenergy_slope_check,
    lambda_exact, lambda_numeric, polarization_integral, Calibration, FutakiNumeric,
    InvariantReport, KEnergy, PathKind, PathSpec, SlopeCheck,
};
pub use manifest::Manifest;
pub use report::{build_report, ReportDocument};
pub use montecarlo::{mc_integrate, mc_integrate_vec, McEstimate, SamplePlan};
pub use polynomial::{
    field_kappa, normalize_field, DiagonalField, DerivOrder, EvalData, HomogeneousPolynomial,
    Monomial,
};
pub use rational::{format_rational, parse_rational, rat, rat_int, rat_to_f64, Rational};
