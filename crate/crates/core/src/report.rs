//! Machine-readable report document: exact values as rational strings,
//! every Monte Carlo value with its standard error, stable key order
//! (struct declaration order).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::identity::run_identity_suite;
use crate::invariants::{calibrate, futaki_report};
use crate::manifest::Manifest;
use crate::montecarlo::{McEstimate, SamplePlan};
use crate::polynomial::{DiagonalField, HomogeneousPolynomial};
use crate::rational::format_rational;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct McOut {
    pub mean_re: f64,
    pub mean_im: f64,
    pub stderr: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl From<&McEstimate> for McOut {
    fn from(e: &McEstimate) -> Self {
        McOut {
            mean_re: e.mean.re,
            mean_im: e.mean.im,
            stderr: e.stderr,
            accepted: e.accepted,
            rejected: e.rejected,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InvariantOut {
    pub q: usize,
    /// Exact closed-form value as a rational string.
    pub closed: String,
    /// Exact recurrence value as a rational string; always equals `closed`.
    pub coeff_route: String,
    pub numeric: McOut,
    pub lambda_q: McOut,
    /// Numeric route within 3 stderr of the exact value.
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CalibrationOut {
    pub degree: McOut,
    pub expected_degree: f64,
    pub hamiltonian: McOut,
    pub expected_hamiltonian: f64,
    pub kappa_mean: f64,
    pub kappa_spread: f64,
    pub kappa_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IdentityCheckOut {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IdentitySuiteOut {
    pub points: usize,
    pub rejected: usize,
    pub checks: Vec<IdentityCheckOut>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportDocument {
    pub manifest: Manifest,
    pub n: usize,
    pub d: usize,
    /// Trace-zero representative of the field actually used.
    pub lambda_normalized: Vec<String>,
    pub kappa: String,
    /// True when the manifest field had nonzero trace and was projected.
    pub field_was_normalized: bool,
    pub seed: u64,
    pub samples: usize,
    pub identity_points: usize,
    pub invariants: Vec<InvariantOut>,
    pub calibration: CalibrationOut,
    pub identity_suite: IdentitySuiteOut,
}

/// Assemble the full report for one manifest: all q, calibration, and the
/// analytic identity tier.
pub fn build_report(
    manifest: &Manifest,
    f: &HomogeneousPolynomial,
    field_raw: &DiagonalField,
    plan: &SamplePlan,
    identity_points: usize,
) -> Result<ReportDocument> {
    let (field, was_normalized) = field_raw.normalized(f.d);
    let m = f.n - 1;

    let mut invariants = Vec::with_capacity(m);
    for q in 1..=m {
        let rep = futaki_report(f, &field, q, plan)?;
        invariants.push(InvariantOut {
            q,
            closed: format_rational(&rep.closed),
            coeff_route: format_rational(&rep.coeff_route),
            numeric: (&rep.numeric).into(),
            lambda_q: (&rep.lambda_q).into(),
            consistent: rep.consistent,
        });
    }

    let cal = calibrate(f, &field, plan)?;
    let calibration = CalibrationOut {
        degree: (&cal.degree).into(),
        expected_degree: cal.expected_degree,
        hamiltonian: (&cal.hamiltonian).into(),
        expected_hamiltonian: cal.expected_hamiltonian,
        kappa_mean: cal.kappa_mean,
        kappa_spread: cal.kappa_spread(),
        kappa_points: cal.kappa_points,
    };

    let res = run_identity_suite(f, &field, plan.seed, identity_points, false)?;
    let checks: Vec<IdentityCheckOut> = res
        .entries()
        .iter()
        .map(|(name, residual, tolerance)| IdentityCheckOut {
            name: name.to_string(),
            residual: *residual,
            tolerance: *tolerance,
            pass: residual <= tolerance,
        })
        .collect();
    let identity_suite = IdentitySuiteOut {
        points: res.points,
        rejected: res.rejected,
        all_pass: checks.iter().all(|c| c.pass),
        checks,
    };

    Ok(ReportDocument {
        manifest: manifest.clone(),
        n: f.n,
        d: f.d,
        lambda_normalized: field.lambdas.iter().map(format_rational).collect(),
        kappa: format_rational(&field.kappa),
        field_was_normalized: was_normalized,
        seed: plan.seed,
        samples: plan.samples,
        identity_points,
        invariants,
        calibration,
        identity_suite,
    })
}

impl ReportDocument {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| crate::error::Error::Manifest(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::error::Error::Manifest(e.to_string()))
    }
}
