//! Monte Carlo integration over the hypersurface.
//!
//! Base points z' are drawn from the Fubini-Study probability density on
//! the chart, obtained as ratios of iid standard complex Gaussians. Over
//! each base point the integrand is summed across the fiber roots, so the
//! estimator targets integrals of top-degree forms over all of M. Sampling
//! is counter-based: sample k is a pure function of (seed, k), which makes
//! results independent of thread count and lets rejected samples simply
//! consume their index.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{fiber_roots, frame_at, ChartPoint, GeometryFrame};
use crate::polynomial::{DiagonalField, HomogeneousPolynomial};

/// Sampling request: how many accepted fibers, where the stream starts, and
/// how much rejection slack is allowed.
#[derive(Debug, Clone)]
pub struct SamplePlan {
    pub seed: u64,
    pub samples: usize,
    /// Total indices that may be consumed, acceptances included.
    /// Defaults to 10x the requested sample count.
    pub budget: usize,
    pub chunk: usize,
}

impl SamplePlan {
    pub fn new(seed: u64, samples: usize) -> Self {
        SamplePlan { seed, samples, budget: samples.saturating_mul(10), chunk: 1024 }
    }
}

/// A Monte Carlo integral with its statistical error.
#[derive(Debug, Clone)]
pub struct McEstimate {
    pub mean: Complex64,
    pub stderr: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl McEstimate {
    pub fn value(&self) -> f64 {
        self.mean.re
    }
}

/// Chart coordinates of sample `index` of the stream labelled `seed`:
/// z'_i = u_i / u_0 for iid standard complex Gaussians u.
pub fn sample_zprime(seed: u64, index: u64, m: usize) -> Option<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut uniform = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let gaussian = |u1: f64, u2: f64| {
        let r = (-2.0 * (1.0 - u1).max(f64::MIN_POSITIVE).ln()).sqrt();
        let ang = 2.0 * std::f64::consts::PI * u2;
        Complex64::from_polar(r, ang)
    };
    let u0 = {
        let (a, b) = (uniform(), uniform());
        gaussian(a, b)
    };
    if u0.norm() < 1e-12 {
        return None;
    }
    let mut zp = Vec::with_capacity(m);
    for _ in 0..m {
        let (a, b) = (uniform(), uniform());
        zp.push(gaussian(a, b) / u0);
    }
    Some(zp)
}

/// Importance weight turning the chart density into the flat measure
/// prod_i (sqrt(-1)/2 pi) dz_i dzbar_i: (1 + |z'|^2)^{m+1} / m!.
pub fn chart_weight(zprime: &[Complex64]) -> f64 {
    let m = zprime.len();
    let x: f64 = zprime.iter().map(|z| z.norm_sqr()).sum();
    let mut fact = 1.0;
    for k in 1..=m {
        fact *= k as f64;
    }
    (1.0 + x).powi(m as i32 + 1) / fact
}

enum FiberOutcome {
    Accepted(Complex64),
    Rejected,
}

fn eval_fiber<Fi>(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    seed: u64,
    index: u64,
    integrand: &Fi,
) -> FiberOutcome
where
    Fi: Fn(&GeometryFrame) -> Result<Complex64> + Sync,
{
    let m = f.n - 1;
    let Some(zp) = sample_zprime(seed, index, m) else {
        return FiberOutcome::Rejected;
    };
    let Ok(roots) = fiber_roots(f, &zp) else {
        return FiberOutcome::Rejected;
    };
    let w = chart_weight(&zp);
    let mut total = Complex64::new(0.0, 0.0);
    for z1 in roots {
        let pt = ChartPoint { zprime: zp.clone(), z1 };
        let frame = match frame_at(f, field, &pt) {
            Ok(fr) => fr,
            Err(_) => return FiberOutcome::Rejected,
        };
        match integrand(&frame) {
            Ok(v) => total += v,
            Err(_) => return FiberOutcome::Rejected,
        }
    }
    FiberOutcome::Accepted(total * Complex64::new(w, 0.0))
}

/// Integrate a top-degree integrand over M. `integrand` receives the
/// geometry frame at one fiber point and returns the coefficient of the
/// flat volume basis there; fiber points are summed internally. Any
/// rejection (lost fiber root, degenerate chart, failed integrand) discards
/// the whole fiber and consumes its sample index.
pub fn mc_integrate<Fi>(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    plan: &SamplePlan,
    integrand: &Fi,
) -> Result<McEstimate>
where
    Fi: Fn(&GeometryFrame) -> Result<Complex64> + Sync,
{
    let mut accepted_vals: Vec<Complex64> = Vec::with_capacity(plan.samples);
    let mut rejected = 0usize;
    let mut next_index = 0u64;
    while accepted_vals.len() < plan.samples {
        if next_index as usize >= plan.budget {
            return Err(Error::BudgetExhausted {
                accepted: accepted_vals.len(),
                requested: plan.samples,
            });
        }
        let chunk = plan.chunk.min(plan.budget - next_index as usize);
        let lo = next_index;
        let hi = lo + chunk as u64;
        // Evaluate the chunk in parallel, then fold sequentially in index
        // order so acceptance is deterministic.
        let results: Vec<FiberOutcome> = (lo..hi)
            .into_par_iter()
            .map(|idx| eval_fiber(f, field, plan.seed, idx, integrand))
            .collect();
        for out in results {
            next_index += 1;
            match out {
                FiberOutcome::Accepted(v) => {
                    accepted_vals.push(v);
                    if accepted_vals.len() == plan.samples {
                        break;
                    }
                }
                FiberOutcome::Rejected => rejected += 1,
            }
        }
    }
    let n = accepted_vals.len() as f64;
    let mean = accepted_vals.iter().sum::<Complex64>() / Complex64::new(n, 0.0);
    let var = accepted_vals
        .iter()
        .map(|v| (v - mean).norm_sqr())
        .sum::<f64>()
        / (n * (n - 1.0).max(1.0));
    Ok(McEstimate {
        mean,
        stderr: var.sqrt(),
        accepted: accepted_vals.len(),
        rejected,
    })
}

/// Integrate several integrands over one shared sample stream. Rejection by
/// any component rejects the fiber for all of them, so the estimates stay
/// correlated and comparable.
pub fn mc_integrate_vec<Fi>(
    f: &HomogeneousPolynomial,
    field: &DiagonalField,
    plan: &SamplePlan,
    dim: usize,
    integrand: &Fi,
) -> Result<Vec<McEstimate>>
where
    Fi: Fn(&GeometryFrame) -> Result<Vec<Complex64>> + Sync,
{
    let mut sums: Vec<Vec<Complex64>> = vec![Vec::with_capacity(plan.samples); dim];
    let mut rejected = 0usize;
    let mut next_index = 0u64;
    let mut accepted = 0usize;
    while accepted < plan.samples {
        if next_index as usize >= plan.budget {
            return Err(Error::BudgetExhausted { accepted, requested: plan.samples });
        }
        let chunk = plan.chunk.min(plan.budget - next_index as usize);
        let lo = next_index;
        let hi = lo + chunk as u64;
        let results: Vec<Option<Vec<Complex64>>> = (lo..hi)
            .into_par_iter()
            .map(|idx| {
                let m = f.n - 1;
                let zp = sample_zprime(plan.seed, idx, m)?;
                let roots = fiber_roots(f, &zp).ok()?;
                let w = chart_weight(&zp);
                let mut total = vec![Complex64::new(0.0, 0.0); dim];
                for z1 in roots {
                    let pt = ChartPoint { zprime: zp.clone(), z1 };
                    let frame = frame_at(f, field, &pt).ok()?;
                    let vals = integrand(&frame).ok()?;
                    debug_assert_eq!(vals.len(), dim);
                    for (t, v) in total.iter_mut().zip(vals) {
                        *t += v;
                    }
                }
                for t in total.iter_mut() {
                    *t *= Complex64::new(w, 0.0);
                }
                Some(total)
            })
            .collect();
        for out in results {
            next_index += 1;
            match out {
                Some(vals) => {
                    for (bucket, v) in sums.iter_mut().zip(vals) {
                        bucket.push(v);
                    }
                    accepted += 1;
                    if accepted == plan.samples {
                        break;
                    }
                }
                None => rejected += 1,
            }
        }
    }
    Ok(sums
        .into_iter()
        .map(|vals| {
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<Complex64>() / Complex64::new(n, 0.0);
            let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>()
                / (n * (n - 1.0).max(1.0));
            McEstimate { mean, stderr: var.sqrt(), accepted, rejected }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::geometry::det_g_closed;

    fn volume_integrand(frame: &GeometryFrame) -> Result<Complex64> {
        // top(omega^m) = m! det g.
        let mut fact = 1.0;
        for k in 1..=frame.m {
            fact *= k as f64;
        }
        Ok(Complex64::new(fact * det_g_closed(frame), 0.0))
    }

    #[test]
    fn sampling_is_counter_based() {
        let a = sample_zprime(7, 123, 3).unwrap();
        let b = sample_zprime(7, 123, 3).unwrap();
        assert_eq!(a, b);
        let c = sample_zprime(7, 124, 3).unwrap();
        assert_ne!(a, c);
        let d = sample_zprime(8, 123, 3).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn hyperplane_volume_is_one() {
        let f = hyperplane_cp2();
        let field = hyperplane_cp2_field();
        let plan = SamplePlan::new(11, 20_000);
        let est = mc_integrate(&f, &field, &plan, &volume_integrand).unwrap();
        assert!(
            (est.value() - 1.0).abs() < 4.0 * est.stderr.max(1e-3),
            "volume {} +- {}",
            est.value(),
            est.stderr
        );
    }

    #[test]
    fn cubic_volume_is_degree() {
        let f = cubic();
        let field = cubic_field();
        let plan = SamplePlan::new(13, 20_000);
        let est = mc_integrate(&f, &field, &plan, &volume_integrand).unwrap();
        assert!(
            (est.value() - 3.0).abs() < 4.0 * est.stderr.max(5e-3),
            "volume {} +- {}",
            est.value(),
            est.stderr
        );
    }

    #[test]
    fn estimates_are_thread_count_invariant() {
        let f = cubic();
        let field = cubic_field();
        let plan = SamplePlan::new(17, 2_000);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| mc_integrate(&f, &field, &plan, &volume_integrand).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.accepted, b.accepted);
        assert_eq!(a.rejected, b.rejected);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = cubic();
        let field = cubic_field();
        let mut plan = SamplePlan::new(19, 1000);
        plan.budget = 10;
        match mc_integrate(&f, &field, &plan, &|_| Err(Error::StencilFailure)) {
            Err(Error::BudgetExhausted { accepted, requested }) => {
                assert_eq!(accepted, 0);
                assert_eq!(requested, 1000);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn vector_integration_matches_scalar() {
        let f = cubic();
        let field = cubic_field();
        let plan = SamplePlan::new(23, 3_000);
        let scalar = mc_integrate(&f, &field, &plan, &volume_integrand).unwrap();
        let vector = mc_integrate_vec(&f, &field, &plan, 2, &|fr| {
            let v = volume_integrand(fr)?;
            Ok(vec![v, v * Complex64::new(2.0, 0.0)])
        })
        .unwrap();
        assert_eq!(vector[0].mean, scalar.mean);
        assert!((vector[1].mean - scalar.mean * Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }
}
