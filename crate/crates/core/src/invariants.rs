//! Invariant pipelines: the integral (numeric) route to the invariants, the
//! Chen-Tian holomorphic invariants, the higher-order K-energy functionals,
//! and the calibration integrals.
//!
//! Notation used throughout: m = n - 1 is the complex dimension of M,
//! alpha = n + 1 - d, omega is the restricted Fubini-Study form and
//! omega_M = alpha * omega its positively scaled multiple in the
//! anticanonical class. The exact harmonic constant of the q-th Chern form
//! against omega_M is alpha_qq / alpha^q.

use num_complex::Complex64;

use crate::combinatorics::{alpha_table, bando_futaki_closed, bando_futaki_coeff_route, binomial};
use crate::error::{Error, Result};
use crate::forms::{chern_direct, polarization_nabla_x, FormPQ};
use crate::geometry::{
    ambient_coords, curvature_fd, fiber_roots, frame_at, weighted_chart_metric, weighted_theta,
    ChartPoint, GeometryFrame,
};
use crate::identity::{curvature_matrix, ddbar_theta_form, omega_form};
use crate::montecarlo::{mc_integrate, mc_integrate_vec, sample_zprime, McEstimate, SamplePlan};
use crate::polynomial::{DerivOrder, DiagonalField, HomogeneousPolynomial};
use crate::rational::{rat_to_f64, Rational};

fn cre(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Independent sub-stream seed for stage `tag` of a pipeline.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn plan_with_seed(plan: &SamplePlan, seed: u64) -> SamplePlan {
    let mut p = plan.clone();
    p.seed = seed;
    p
}

/// Exact harmonic constant lambda_q of c_q against omega_M^q.
pub fn lambda_exact(n: usize, d: usize, q: usize) -> Result<Rational> {
    let table = alpha_table(n, d, q)?;
    let alpha = crate::rational::rat_int(n as i64 + 1 - d as i64);
    let mut denom = crate::rational::rat_int(1);
    for _ in 0..q {
        denom *= alpha.clone();
    }
    if denom.numer() == &num::BigInt::from(0) {
        return Err(Error::Domain("lambda_q undefined for d = n + 1".into()));
    }
    Ok(table.entry(q, q).clone() / denom)
}

/// Two-pass Monte Carlo estimate of the q-th invariant.
#[derive(Debug, Clone)]
pub struct FutakiNumeric {
    pub value: McEstimate,
    pub lambda: McEstimate,
}

/// Monte Carlo estimate of the harmonic proportionality constant
/// lambda_q = Int c_q ^ omega_M^{m-q} / Int omega_M^m of the metric at hand.
/// On manifolds with singular points this geometric ratio can differ from
/// the formal constant `lambda_exact`, which is the value forced by the
/// coefficient recurrence on a smooth member of the family.
pub fn lambda_numeric(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    q: usize,
    plan: &SamplePlan,
) -> Result<McEstimate> {
    let m = f.n - 1;
    if q < 1 || q > m {
        return Err(Error::Domain(format!("q = {q} out of range 1..={m}")));
    }
    let alpha = (f.n + 1 - f.d) as f64;
    let ests = mc_integrate_vec(f, field, plan, 2, &|fr| {
        let omega_m = omega_form(fr).scale_re(alpha);
        let curv = curvature_matrix(fr);
        let pq = chern_direct(&curv, q);
        let a = pq.wedge(&omega_m.pow(m - q))?.top_coefficient()?;
        let b = omega_m.pow(m).top_coefficient()?;
        Ok(vec![a, b])
    })?;
    let (a, b) = (&ests[0], &ests[1]);
    let lam = a.mean.re / b.mean.re;
    // Conservative ratio error bound from the triangle inequality.
    let lam_err = (a.stderr + lam.abs() * b.stderr) / b.mean.re.abs();
    Ok(McEstimate {
        mean: cre(lam),
        stderr: lam_err,
        accepted: a.accepted,
        rejected: a.rejected,
    })
}

/// The centered theta-weighted integral
/// I_q = Int alpha theta (c_q - lambda_q omega_M^q) ^ omega_M^{m-q}
/// with the exact harmonic constant lambda_q, evaluated in its
/// integration-by-parts representation: substituting the (pointwise
/// verified) decomposition c_q - lambda_q omega_M^q =
/// sum_{k<q} alpha_qk omega^k ^ Xi^{q-k} and moving one ddbar from xi onto
/// theta (all remaining wedge factors are closed), each term becomes
/// xi ddbar(theta) ^ omega^{k+m-q} ^ Xi^{q-k-1}. This form has one fewer
/// curvature-scale factor, which keeps the sampling tails integrable, and
/// on a fixture with singular points it evaluates the current-theoretic
/// (formal) integral that the exact routes compute.
fn centered_theta_integral(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    q: usize,
    plan: &SamplePlan,
) -> Result<McEstimate> {
    let m = f.n - 1;
    if q < 1 || q > m {
        return Err(Error::Domain(format!("q = {q} out of range 1..={m}")));
    }
    let alpha = (f.n + 1 - f.d) as f64;
    let table = alpha_table(f.n, f.d, q)?;
    let coefs: Vec<f64> = (0..q).map(|k| rat_to_f64(table.entry(q, k))).collect();
    let scale = alpha.powi((1 + m - q) as i32);
    mc_integrate(f, field, plan, &|fr| {
        let omega = omega_form(fr);
        let xi_form = FormPQ::one_one(&fr.ddbar_xi);
        let ddth = ddbar_theta_form(fr);
        let mut total = Complex64::new(0.0, 0.0);
        for (k, c) in coefs.iter().enumerate() {
            let term = ddth
                .wedge(&omega.pow(k + m - q))?
                .wedge(&xi_form.pow(q - k - 1))?
                .top_coefficient()?;
            total += cre(*c) * term;
        }
        Ok(cre(scale * fr.xi) * total)
    })
}

/// The q-th invariant by the theta-weighted integral:
/// F_q = (m + 1 - q) Int alpha theta (c_q - lambda_q omega_M^q) ^ omega_M^{m-q},
/// evaluated through `centered_theta_integral` (exact harmonic constant,
/// integration-by-parts form). The overall sign matches this library's
/// Hamiltonian convention theta = -sum lambda_i |Z_i|^2 / |Z|^2 and is
/// pinned by cross-route agreement with the exact formulas on reference
/// examples. A separate pass still measures the harmonic ratio lambda_q of
/// the metric at hand for reporting.
pub fn futaki_numeric(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    q: usize,
    plan: &SamplePlan,
) -> Result<FutakiNumeric> {
    let m = f.n - 1;
    if q < 1 || q > m {
        return Err(Error::Domain(format!("q = {q} out of range 1..={m}")));
    }

    // Pass 1: measured lambda_q over an independent sub-stream (reported;
    // the centered integral uses the exact constant, so no sensitivity
    // propagation is needed).
    let pass1 = plan_with_seed(plan, derive_seed(plan.seed, 1));
    let lambda = lambda_numeric(f, field, q, &pass1)?;

    // Pass 2: the centered theta-weighted integral.
    let pass2 = plan_with_seed(plan, derive_seed(plan.seed, 2));
    let est = centered_theta_integral(f, field, q, &pass2)?;
    let factor = (m + 1 - q) as f64;
    let value = McEstimate {
        mean: cre(factor) * est.mean,
        stderr: factor * est.stderr,
        accepted: est.accepted,
        rejected: est.rejected,
    };
    Ok(FutakiNumeric { value, lambda })
}

/// The vanishing integral Int q Ptilde^q(nabla X, Theta, ..) ^ omega_M^{m+1-q};
/// zero for every q by the divergence theorem.
pub fn polarization_integral(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    q: usize,
    plan: &SamplePlan,
) -> Result<McEstimate> {
    let m = f.n - 1;
    if q < 1 || q > m {
        return Err(Error::Domain(format!("q = {q} out of range 1..={m}")));
    }
    let alpha = (f.n + 1 - f.d) as f64;
    mc_integrate(f, field, plan, &|fr| {
        let omega_m = omega_form(fr).scale_re(alpha);
        let curv = curvature_matrix(fr);
        let pol = polarization_nabla_x(&fr.nabla_x, &curv, q).scale_re(q as f64);
        pol.wedge(&omega_m.pow(m + 1 - q))?.top_coefficient()
    })
}

/// The k-th Chen-Tian invariant by direct Monte Carlo integration:
/// F_k = (m-k) Int theta_X omega_M^m
///     + (k+1) Int (lap theta_X) Ric^k ^ omega_M^{m-k}
///     - (m-k) Int theta_X Ric^{k+1} ^ omega_M^{m-k-1},
/// with theta_X = -alpha theta the Hamiltonian of the field against omega_M
/// and lap theta_X its omega_M-Laplacian.
pub fn chen_tian(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    k: usize,
    plan: &SamplePlan,
) -> Result<McEstimate> {
    let m = f.n - 1;
    if k + 1 > m {
        return Err(Error::Domain(format!("k = {k} out of range 0..={}", m - 1)));
    }
    let alpha = (f.n + 1 - f.d) as f64;
    let binoms: Vec<f64> = (0..=k + 1)
        .map(|j| {
            use num::ToPrimitive;
            binomial(k + 1, j as i64).to_f64().unwrap_or(0.0)
        })
        .collect();
    mc_integrate(f, field, plan, &|fr| {
        let omega = omega_form(fr);
        let omega_m = omega.scale_re(alpha);
        let ric = FormPQ::one_one(&fr.ricci);
        let xi_form = FormPQ::one_one(&fr.ddbar_xi);
        let ddth = ddbar_theta_form(fr);
        let theta_x = cre(-alpha * fr.theta);
        let lap_theta_x = cre(-fr.lap_theta);
        let t1 = theta_x * omega_m.pow(m).top_coefficient()?;
        let t2 = lap_theta_x
            * ric.pow(k).wedge(&omega_m.pow(m - k))?.top_coefficient()?;
        // Int theta_X Ric^{k+1} ^ omega_M^{m-k-1}, expanded through
        // Ric = alpha omega - Xi; every term carrying a Xi factor is
        // integrated by parts (theta ddbar(xi) <-> xi ddbar(theta)), which
        // removes one curvature-scale factor and keeps the sampling tails
        // integrable near any singular point of the fixture.
        let scale_m = alpha.powi((m - k - 1) as i32);
        let mut t3 = Complex64::new(0.0, 0.0);
        for (j, b) in binoms.iter().enumerate() {
            let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
            let c = b * sign * alpha.powi((k + 1 - j) as i32);
            let term = if j == 0 {
                theta_x * omega.pow(m).top_coefficient()?
            } else {
                cre(-alpha * fr.xi)
                    * ddth
                        .wedge(&xi_form.pow(j - 1))?
                        .wedge(&omega.pow(m - j))?
                        .top_coefficient()?
            };
            t3 += cre(scale_m * c) * term;
        }
        Ok(cre((m - k) as f64) * (t1 - t3) + cre((k + 1) as f64) * t2)
    })
}

/// Metric path for the K-energy functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// Pull-backs of the Fubini-Study form under the automorphism flow of
    /// the field: weights e^{2 lambda_i t}.
    Automorphism,
    /// Straight line in metric space between the same endpoints.
    Linear,
}

#[derive(Debug, Clone)]
pub struct PathSpec {
    pub kind: PathKind,
    pub t_end: f64,
    /// Quadrature subintervals (rounded up to even for Simpson's rule).
    pub t_steps: usize,
}

impl PathSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end <= 1.0) {
            return Err(Error::Domain("t_end must lie in (0, 1]".into()));
        }
        if self.t_steps < 4 {
            return Err(Error::Domain("t_steps must be at least 4".into()));
        }
        Ok(())
    }
}

/// K-energy value with its Monte Carlo uncertainty.
#[derive(Debug, Clone)]
pub struct KEnergy {
    pub value: f64,
    pub stderr: f64,
    pub nodes: usize,
    pub volume: McEstimate,
}

fn automorphism_weights(lambdas: &[f64], t: f64) -> Vec<f64> {
    lambdas.iter().map(|l| (2.0 * l * t).exp()).collect()
}

/// Inner integrand of the K-energy at parameter t: the potential velocity
/// times the centered q-th Chern form of the path metric, as a top form.
fn kenergy_node_integrand(
    f: &HomogeneousPolynomial,
    lambdas: &[f64],
    path: &PathSpec,
    q: usize,
    lam_q: f64,
    alpha: f64,
    t: f64,
    fr: &GeometryFrame,
) -> Result<Complex64> {
    let m = fr.m;
    let n = f.n;
    let wt = automorphism_weights(lambdas, t);
    let w_end = automorphism_weights(lambdas, path.t_end);
    let metric = |zp: &[Complex64], z1: Complex64| -> Result<nalgebra::DMatrix<Complex64>> {
        let amb = ambient_coords(zp, z1);
        let ev = f.eval_with_derivs(&amb, DerivOrder::Gradient);
        let a: Vec<Complex64> = (0..m).map(|i| -ev.grad[i + 2] / ev.grad[1]).collect();
        let g = match path.kind {
            PathKind::Automorphism => weighted_chart_metric(&wt, zp, z1, &a),
            PathKind::Linear => {
                let g0 = weighted_chart_metric(&vec![1.0; n + 1], zp, z1, &a);
                let g1 = weighted_chart_metric(&w_end, zp, z1, &a);
                g0 * cre(1.0 - t) + g1 * cre(t)
            }
        };
        Ok(g * cre(alpha))
    };
    let g_here = metric(&fr.point.zprime, fr.point.z1)?;
    let omega_t = FormPQ::one_one(&g_here);
    let curv = curvature_fd(f, &fr.point, &fr.a, 1e-4, &metric)?;
    let entries: Vec<Vec<FormPQ>> = (0..m)
        .map(|k| (0..m).map(|l| FormPQ::one_one(&curv[l][k])).collect())
        .collect();
    let pq = chern_direct(&crate::forms::CurvatureMatrix::new(entries), q);
    let centered = pq.sub(&omega_t.pow(q).scale_re(lam_q))?;
    let phidot = match path.kind {
        PathKind::Automorphism => -2.0 * alpha * weighted_theta(lambdas, &wt, &fr.ambient),
        PathKind::Linear => {
            let num: f64 = fr
                .ambient
                .iter()
                .enumerate()
                .map(|(i, z)| w_end[i] * z.norm_sqr())
                .sum();
            let den: f64 = fr.ambient.iter().map(|z| z.norm_sqr()).sum();
            alpha * (num / den).ln()
        }
    };
    Ok(cre(phidot) * centered.wedge(&omega_t.pow(m - q))?.top_coefficient()?)
}

/// Higher-order K-energy M_q along the chosen path, by composite Simpson
/// quadrature in t of Monte Carlo inner integrals. The harmonic constant
/// lambda_q is cohomological, hence constant along the path, and is taken
/// from the exact formula.
pub fn kenergy(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    q: usize,
    path: &PathSpec,
    plan: &SamplePlan,
) -> Result<KEnergy> {
    let m = f.n - 1;
    if q < 1 || q > m {
        return Err(Error::Domain(format!("q = {q} out of range 1..={m}")));
    }
    path.validate()?;
    let alpha = (f.n + 1 - f.d) as f64;
    let lam_q = rat_to_f64(&lambda_exact(f.n, f.d, q)?);
    let lambdas = field.lambdas_f64.clone();

    // Volume of M against the unscaled restricted Fubini-Study form.
    let vplan = plan_with_seed(plan, derive_seed(plan.seed, 100));
    let volume = mc_integrate(f, field, &vplan, &|fr| {
        omega_form(fr).pow(m).top_coefficient()
    })?;
    let v = volume.mean.re;

    let subs = path.t_steps + path.t_steps % 2;
    let h = path.t_end / subs as f64;
    let mut total = 0.0;
    let mut var = 0.0;
    for node in 0..=subs {
        let t = h * node as f64;
        let w = h / 3.0
            * if node == 0 || node == subs {
                1.0
            } else if node % 2 == 1 {
                4.0
            } else {
                2.0
            };
        let nplan = plan_with_seed(plan, derive_seed(plan.seed, 200 + node as u64));
        let est = mc_integrate(f, field, &nplan, &|fr| {
            kenergy_node_integrand(f, &lambdas, path, q, lam_q, alpha, t, fr)
        })?;
        total += w * est.mean.re;
        var += (w * est.stderr).powi(2);
    }
    let value = total / v;
    let stderr = ((var.sqrt() / v).powi(2) + (total * volume.stderr / (v * v)).powi(2)).sqrt();
    Ok(KEnergy { value, stderr, nodes: subs + 1, volume })
}

/// Slope identity at t = 0 along the automorphism path: with
/// phidot_0 = -2 alpha theta the K-energy slope satisfies
/// -(m + 1 - q) Int phidot_0 (c_q - lambda_q omega_M^q) ^ omega_M^{m-q} = 2 F_q.
/// Both sides are reported without the 1/V normalization, which cancels.
/// The centered integral is evaluated with the exact harmonic constant in
/// the same integration-by-parts form as the numeric invariant route, on an
/// independent sample sub-stream.
#[derive(Debug, Clone)]
pub struct SlopeCheck {
    pub closed_side: f64,
    pub slope: McEstimate,
    pub pass: bool,
}

pub fn kenergy_slope_check(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    q: usize,
    plan: &SamplePlan,
) -> Result<SlopeCheck> {
    let m = f.n - 1;
    if q < 1 || q > m {
        return Err(Error::Domain(format!("q = {q} out of range 1..={m}")));
    }
    let closed = 2.0 * rat_to_f64(&bando_futaki_closed(f.n, f.d, q, &field.kappa)?);
    let pass = plan_with_seed(plan, derive_seed(plan.seed, 3));
    let est = centered_theta_integral(f, field, q, &pass)?;
    // phidot_0 = -2 alpha theta, so the slope integral equals -2 I_q and
    // the left side is 2 (m + 1 - q) I_q.
    let factor = 2.0 * (m + 1 - q) as f64;
    let slope = McEstimate {
        mean: cre(factor) * est.mean,
        stderr: factor * est.stderr,
        accepted: est.accepted,
        rejected: est.rejected,
    };
    let pass = (slope.mean.re - closed).abs() <= 3.0 * slope.stderr.max(1e-12);
    Ok(SlopeCheck { closed_side: closed, slope, pass })
}

/// Calibration results: the two exact-valued integrals and the pointwise
/// kappa spread from the divergence identity.
#[derive(Debug, Clone)]
pub struct Calibration {
    /// Int omega^m; exactly the degree d.
    pub degree: McEstimate,
    pub expected_degree: f64,
    /// Int theta omega^m; exactly kappa / n.
    pub hamiltonian: McEstimate,
    pub expected_hamiltonian: f64,
    pub kappa_mean: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_points: usize,
}

impl Calibration {
    pub fn kappa_spread(&self) -> f64 {
        self.kappa_max - self.kappa_min
    }
}

pub fn calibrate(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    plan: &SamplePlan,
) -> Result<Calibration> {
    let m = f.n - 1;
    let alpha = (f.n + 1 - f.d) as f64;
    let ests = mc_integrate_vec(f, field, plan, 2, &|fr| {
        let vol = omega_form(fr).pow(m).top_coefficient()?;
        Ok(vec![vol, cre(fr.theta) * vol])
    })?;

    // Pointwise kappa from the divergence identity, over a smaller batch.
    let points = plan.samples.min(2000).max(1);
    let kplan = plan_with_seed(plan, derive_seed(plan.seed, 7));
    let mut kappas: Vec<f64> = Vec::with_capacity(points);
    let mut index = 0u64;
    while kappas.len() < points && (index as usize) < kplan.budget {
        let idx = index;
        index += 1;
        let Some(zp) = sample_zprime(kplan.seed, idx, m) else { continue };
        let Ok(roots) = fiber_roots(f, &zp) else { continue };
        for z1 in roots {
            if kappas.len() >= points {
                break;
            }
            let pt = ChartPoint { zprime: zp.clone(), z1 };
            if let Ok(fr) = frame_at(f, field, &pt) {
                kappas.push(-(fr.div_x.re - fr.x_xi.re - alpha * fr.theta));
            }
        }
    }
    if kappas.is_empty() {
        return Err(Error::BudgetExhausted { accepted: 0, requested: points });
    }
    let kappa_mean = kappas.iter().sum::<f64>() / kappas.len() as f64;
    let kappa_min = kappas.iter().cloned().fold(f64::INFINITY, f64::min);
    let kappa_max = kappas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Calibration {
        degree: ests[0].clone(),
        expected_degree: f.d as f64,
        hamiltonian: ests[1].clone(),
        expected_hamiltonian: rat_to_f64(&field.kappa) / f.n as f64,
        kappa_mean,
        kappa_min,
        kappa_max,
        kappa_points: kappas.len(),
    })
}

/// All three routes to the q-th invariant plus their agreement verdict.
#[derive(Debug, Clone)]
pub struct InvariantReport {
    pub n: usize,
    pub d: usize,
    pub q: usize,
    pub kappa: Rational,
    pub closed: Rational,
    pub coeff_route: Rational,
    pub numeric: McEstimate,
    pub lambda_q: McEstimate,
    /// Numeric route within 3 stderr of the exact value.
    pub consistent: bool,
}

pub fn futaki_report(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    q: usize,
    plan: &SamplePlan,
) -> Result<InvariantReport> {
    let closed = bando_futaki_closed(f.n, f.d, q, &field.kappa)?;
    let coeff_route = bando_futaki_coeff_route(f.n, f.d, q, &field.kappa)?;
    let numeric = futaki_numeric(f, field, q, plan)?;
    let exact = rat_to_f64(&closed);
    let consistent =
        (numeric.value.mean.re - exact).abs() <= 3.0 * numeric.value.stderr.max(1e-9);
    Ok(InvariantReport {
        n: f.n,
        d: f.d,
        q,
        kappa: field.kappa.clone(),
        closed,
        coeff_route,
        numeric: numeric.value,
        lambda_q: numeric.lambda,
        consistent,
    })
}
