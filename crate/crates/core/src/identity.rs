//! Pointwise verification suite.
//!
//! Every differential-geometric identity the closed-form invariants rest on
//! is checked at concrete points of M: metric inverse and determinant,
//! Ricci against the global potential, the trace and Chern-decomposition
//! identities, the divergence identity that recovers kappa, and the
//! polarization identity that drives the integral route. An optional
//! finite-difference tier re-derives curvature and the full divergence
//! expansion numerically.

use num_complex::Complex64;

use crate::combinatorics::alpha_table;
use crate::error::Result;
use crate::forms::{chern_direct, polarization_nabla_x, trace_power, CurvatureMatrix, FormPQ};
use crate::geometry::{
    ambient_coords, curvature_fd, ddbar_fd, fiber_roots, frame_at, weighted_chart_metric,
    ChartPoint, GeometryFrame,
};
use crate::montecarlo::sample_zprime;
use crate::polynomial::{DerivOrder, DiagonalField, HomogeneousPolynomial};
use crate::rational::rat_to_f64;

fn cre(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Kahler form of the restricted Fubini-Study metric as a FormPQ.
pub fn omega_form(frame: &GeometryFrame) -> FormPQ {
    FormPQ::one_one(&frame.g)
}

/// Curvature of the restricted metric as a (1,1)-form valued matrix.
pub fn curvature_matrix(frame: &GeometryFrame) -> CurvatureMatrix {
    let m = frame.m;
    let entries: Vec<Vec<FormPQ>> = (0..m)
        .map(|k| {
            (0..m)
                .map(|l| FormPQ::one_one(&frame.curvature[l][k]))
                .collect()
        })
        .collect();
    CurvatureMatrix::new(entries)
}

/// The (1,1) form of the second derivatives of the Hamiltonian potential.
pub fn ddbar_theta_form(frame: &GeometryFrame) -> FormPQ {
    FormPQ::one_one(&frame.ddbar_theta)
}

/// The (1,1) form of the second derivatives of the Ricci potential xi.
pub fn ddbar_xi_form(frame: &GeometryFrame) -> FormPQ {
    FormPQ::one_one(&frame.ddbar_xi)
}

/// Worst-case residuals of the pointwise suite across a batch of points.
#[derive(Debug, Clone, Default)]
pub struct IdentityResiduals {
    /// |g g_inv^T - I|, max entry.
    pub inverse: f64,
    /// Relative error of det g against its closed form.
    pub determinant: f64,
    /// |sum a_k z_k - z_1 - F_0/F_1| relative to |F_0/F_1| + 1.
    pub euler_chart: f64,
    /// Ricci = (n+1-d) g - ddbar_xi, max entry.
    pub ricci_potential: f64,
    /// Trace identity: phi_j = (n+1) omega^j - (d omega + Xi)^j.
    pub trace_identity: f64,
    /// Chern decomposition: P^q = sum_k alpha_qk omega^k Xi^{q-k}.
    pub chern_decomposition: f64,
    /// div X - X(xi) - (n+1-d) theta + kappa.
    pub divergence_kappa: f64,
    /// div X - lap theta.
    pub divergence_laplacian: f64,
    /// q Ptilde^q wedge omega^{m+1-q} + (m+1-q) ddbar_theta P^{q-1} omega^{m-q}.
    pub polarization: f64,
    /// Closed-form curvature vs finite differences (optional tier).
    pub curvature_fd: f64,
    /// Divergence-expansion decomposition with FD ddbar(lap theta) (optional tier).
    pub divergence_expansion: f64,
    /// Points the suite actually evaluated.
    pub points: usize,
    /// Sample indices rejected before reaching `points`.
    pub rejected: usize,
}

impl IdentityResiduals {
    fn absorb(&mut self, other: &IdentityResiduals) {
        self.inverse = self.inverse.max(other.inverse);
        self.determinant = self.determinant.max(other.determinant);
        self.euler_chart = self.euler_chart.max(other.euler_chart);
        self.ricci_potential = self.ricci_potential.max(other.ricci_potential);
        self.trace_identity = self.trace_identity.max(other.trace_identity);
        self.chern_decomposition = self.chern_decomposition.max(other.chern_decomposition);
        self.divergence_kappa = self.divergence_kappa.max(other.divergence_kappa);
        self.divergence_laplacian = self.divergence_laplacian.max(other.divergence_laplacian);
        self.polarization = self.polarization.max(other.polarization);
        self.curvature_fd = self.curvature_fd.max(other.curvature_fd);
        self.divergence_expansion = self.divergence_expansion.max(other.divergence_expansion);
    }

    /// Named (residual, tolerance) pairs for reporting; the FD tiers are
    /// included only when they ran.
    pub fn entries(&self) -> Vec<(&'static str, f64, f64)> {
        let mut out = vec![
            ("metric_inverse", self.inverse, 1e-9),
            ("metric_determinant", self.determinant, 1e-9),
            ("euler_chart_ratio", self.euler_chart, 1e-9),
            ("ricci_potential", self.ricci_potential, 1e-9),
            ("trace_identity", self.trace_identity, 1e-8),
            ("chern_decomposition", self.chern_decomposition, 1e-8),
            ("divergence_kappa", self.divergence_kappa, 1e-8),
            ("divergence_laplacian", self.divergence_laplacian, 1e-9),
            ("polarization_identity", self.polarization, 1e-8),
        ];
        if self.curvature_fd > 0.0 {
            out.push(("curvature_fd", self.curvature_fd, 1e-4));
            out.push(("divergence_expansion_fd", self.divergence_expansion, 1e-3));
        }
        out
    }

    pub fn all_pass(&self) -> bool {
        self.entries().iter().all(|(_, r, tol)| r <= tol)
    }
}

/// Residuals of the analytic tier at a single frame.
pub fn residuals_at(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    frame: &GeometryFrame,
) -> IdentityResiduals {
    let m = frame.m;
    let n = frame.n;
    let d = f.d as f64;
    let alpha = n as f64 + 1.0 - d;
    let kappa = rat_to_f64(&field.kappa);
    let mut res = IdentityResiduals { points: 1, ..Default::default() };

    // Metric inverse and determinant.
    let prod = &frame.g * frame.g_inv.transpose();
    for i in 0..m {
        for j in 0..m {
            let expect = if i == j { cre(1.0) } else { cre(0.0) };
            res.inverse = res.inverse.max((prod[(i, j)] - expect).norm());
        }
    }
    let det = frame.g.determinant().re;
    let det_closed = crate::geometry::det_g_closed(frame);
    res.determinant = (det - det_closed).abs() / det_closed;

    // Chart form of the Euler identity.
    let ev = f.eval_with_derivs(&frame.ambient, DerivOrder::Gradient);
    let c: Complex64 = frame
        .a
        .iter()
        .zip(frame.point.zprime.iter())
        .map(|(ai, zi)| ai * zi)
        .sum::<Complex64>()
        - frame.point.z1;
    let f0f1 = ev.grad[0] / ev.grad[1];
    res.euler_chart = (c - f0f1).norm() / (1.0 + f0f1.norm());

    // Ricci from the global potential.
    for i in 0..m {
        for j in 0..m {
            let lhs = frame.ricci[(i, j)];
            let rhs = cre(alpha) * frame.g[(i, j)] - frame.ddbar_xi[(i, j)];
            res.ricci_potential = res.ricci_potential.max((lhs - rhs).norm());
        }
    }

    // Form-algebra identities.
    let omega = omega_form(frame);
    let xi = ddbar_xi_form(frame);
    let theta_form = ddbar_theta_form(frame);
    let curv = curvature_matrix(frame);
    let dwxi = omega.scale_re(d).add(&xi).unwrap();
    let alphas = alpha_table(n, f.d, m).unwrap();
    for j in 1..=m {
        let phi = trace_power(&curv, j);
        let lead = omega.pow(j).scale_re(n as f64 + 1.0);
        let expect = lead.sub(&dwxi.pow(j)).unwrap();
        // Normalize by the ingredients: the two sides can nearly cancel.
        let scale = lead.max_abs().max(dwxi.pow(j).max_abs()).max(phi.max_abs());
        res.trace_identity = res.trace_identity.max(phi.max_abs_diff(&expect) / scale);
    }
    for q in 1..=m {
        let p = chern_direct(&curv, q);
        let mut expect = FormPQ::zero(m, q);
        let mut scale = p.max_abs();
        for k in 0..=q {
            let coeff = rat_to_f64(alphas.entry(q, k));
            let term = omega.pow(k).wedge(&xi.pow(q - k)).unwrap().scale_re(coeff);
            scale = scale.max(term.max_abs());
            expect = expect.add(&term).unwrap();
        }
        res.chern_decomposition = res
            .chern_decomposition
            .max(p.max_abs_diff(&expect) / scale.max(1e-12));
    }

    // Divergence identities.
    res.divergence_kappa =
        (frame.div_x - frame.x_xi - cre(alpha * frame.theta) + cre(kappa)).norm();
    res.divergence_laplacian = (frame.div_x - cre(frame.lap_theta)).norm();

    // Polarization identity, top-coefficient form.
    for q in 1..=m {
        let lhs = polarization_nabla_x(&frame.nabla_x, &curv, q)
            .wedge(&omega.pow(m + 1 - q))
            .unwrap()
            .scale_re(q as f64)
            .top_coefficient()
            .unwrap();
        let rhs = theta_form
            .wedge(&chern_direct_or_unit(&curv, q - 1))
            .unwrap()
            .wedge(&omega.pow(m - q))
            .unwrap()
            .scale_re(-((m + 1 - q) as f64))
            .top_coefficient()
            .unwrap();
        let scale = lhs.norm().max(rhs.norm()).max(1.0);
        res.polarization = res.polarization.max((lhs - rhs).norm() / scale);
    }
    res
}

fn chern_direct_or_unit(curv: &CurvatureMatrix, q: usize) -> FormPQ {
    if q == 0 {
        FormPQ::scalar_re(curv.m, 1.0)
    } else {
        chern_direct(curv, q)
    }
}

/// Residuals of the finite-difference tier at a single frame: curvature by
/// nested stencils and the divergence expansion of q Ptilde^q in terms of
/// the trace data, whose ddbar(lap theta) term is itself produced by FD.
pub fn fd_residuals_at(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    frame: &GeometryFrame,
) -> Result<IdentityResiduals> {
    let m = frame.m;
    let n = frame.n;
    let d = f.d as f64;

    // The fixed-step stencils are an oracle only where their own truncation
    // and roundoff are controlled: skip far-out chart points (the step is
    // then vanishingly small relative to |z|) and near-branch points (the
    // higher derivatives entering the truncation term blow up). Callers
    // count a skip as a rejected sample, like any other degenerate chart.
    let dscale = 1.0
        + frame.point.z1.norm_sqr()
        + frame.point.zprime.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if dscale > 1e4 || frame.rho > 5.0 {
        return Err(crate::error::Error::StencilFailure);
    }
    let mut res = IdentityResiduals { points: 1, ..Default::default() };

    let metric = |zp: &[Complex64], z1: Complex64| {
        let amb = ambient_coords(zp, z1);
        let ev = f.eval_with_derivs(&amb, DerivOrder::Gradient);
        let a: Vec<Complex64> = (0..m).map(|i| -ev.grad[i + 2] / ev.grad[1]).collect();
        Ok(weighted_chart_metric(&vec![1.0; n + 1], zp, z1, &a))
    };
    // Step choice: truncation error scales like h^2 times fourth
    // derivatives (large near the branch locus, where small absolute steps
    // are needed), while cancellation noise scales with the size of the
    // sampled values, which grows with the chart distance. A step
    // proportional to the chart scale balances the two at every point the
    // conditioning gate admits.
    let step = 2e-5 * dscale.sqrt();
    let rfd = curvature_fd(f, &frame.point, &frame.a, step, &metric)?;
    let scale = frame
        .curvature
        .iter()
        .flatten()
        .map(|mtx| mtx.iter().map(|v| v.norm()).fold(0.0, f64::max))
        .fold(1.0, f64::max);
    for l in 0..m {
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let diff = (rfd[l][k][(i, j)] - frame.curvature[l][k][(i, j)]).norm();
                    res.curvature_fd = res.curvature_fd.max(diff / scale);
                }
            }
        }
    }

    // ddbar of the closed-form Laplacian by stencil differentiation.
    let lap_field = |zp: &[Complex64], z1: Complex64| -> Result<Complex64> {
        let pt = ChartPoint { zprime: zp.to_vec(), z1 };
        Ok(cre(frame_at(f, field, &pt)?.lap_theta))
    };
    let mut ddbar_lap = nalgebra::DMatrix::from_element(m, m, cre(0.0));
    for i in 0..m {
        for j in 0..m {
            ddbar_lap[(i, j)] = ddbar_fd(f, &frame.point, &frame.a, i, j, 1e-4, &lap_field)?;
        }
    }
    let ddbar_lap_form = FormPQ::one_one(&ddbar_lap);

    // Divergence expansion: q Ptilde^q = sum_j (-1)^{j-1} E_j wedge P^{q-j}.
    let omega = omega_form(frame);
    let xi = ddbar_xi_form(frame);
    let theta_form = ddbar_theta_form(frame);
    let curv = curvature_matrix(frame);
    let dwxi = omega.scale_re(d).add(&xi).unwrap();
    let psi = |i: usize| dwxi.pow(i);
    let zeta = |i: usize| {
        let mut acc = FormPQ::zero(m, i);
        for k in 0..=i {
            acc = acc.add(&dwxi.pow(i - k).wedge(&omega.pow(k)).unwrap()).unwrap();
        }
        acc
    };
    for q in 1..=m {
        let lhs = polarization_nabla_x(&frame.nabla_x, &curv, q).scale_re(q as f64);
        let mut rhs = FormPQ::zero(m, q - 1);
        for j in 1..=q {
            let e_j = if j == 1 {
                FormPQ::scalar(m, frame.div_x)
            } else {
                let mut e = psi(j - 1).scale(frame.div_x);
                let drift = psi(j - 1).sub(&omega.pow(j - 1)).unwrap();
                e = e.sub(&drift.scale_re((n as f64 + 1.0) * frame.theta)).unwrap();
                let zterm = zeta(j - 2)
                    .scale_re(n as f64)
                    .add(&omega.pow(j - 2))
                    .unwrap();
                e = e.sub(&theta_form.wedge(&zterm).unwrap()).unwrap();
                e = e.add(&ddbar_lap_form.wedge(&zeta(j - 2)).unwrap()).unwrap();
                e
            };
            let term = e_j.wedge(&chern_direct_or_unit(&curv, q - j)).unwrap();
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            rhs = rhs.add(&term.scale_re(sign)).unwrap();
        }
        res.divergence_expansion = res.divergence_expansion.max(lhs.rel_diff(&rhs));
    }
    Ok(res)
}

/// Run the suite at `points` accepted random points of M drawn from the
/// standard sample stream. `with_fd` adds the finite-difference tier.
pub fn run_identity_suite(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    seed: u64,
    points: usize,
    with_fd: bool,
) -> Result<IdentityResiduals> {
    let m = f.n - 1;
    let mut total = IdentityResiduals::default();
    let mut index = 0u64;
    while total.points < points {
        if index as usize > points * 20 {
            return Err(crate::error::Error::BudgetExhausted {
                accepted: total.points,
                requested: points,
            });
        }
        let idx = index;
        index += 1;
        let Some(zp) = sample_zprime(seed, idx, m) else {
            total.rejected += 1;
            continue;
        };
        let Ok(roots) = fiber_roots(f, &zp) else {
            total.rejected += 1;
            continue;
        };
        let mut frames = Vec::new();
        let mut ok = true;
        for z1 in roots {
            let pt = ChartPoint { zprime: zp.clone(), z1 };
            match frame_at(f, field, &pt) {
                Ok(fr) => frames.push(fr),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            total.rejected += 1;
            continue;
        }
        for frame in frames {
            if total.points >= points {
                break;
            }
            let mut r = residuals_at(f, field, &frame);
            if with_fd {
                match fd_residuals_at(f, field, &frame) {
                    Ok(fd) => r.absorb(&fd),
                    Err(_) => {
                        total.rejected += 1;
                        continue;
                    }
                }
            }
            total.absorb(&r);
            total.points += 1;
        }
    }
    Ok(total)
}
