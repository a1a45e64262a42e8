//! Command-line front end: exact invariant routes, verification suites,
//! calibration, Chen-Tian invariants, K-energy functionals, and full JSON
//! reports for hypersurface manifests.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use futaki::error::Error;
use futaki::invariants::{
    calibrate, chen_tian, futaki_numeric, kenergy, PathKind, PathSpec,
};
use futaki::montecarlo::SamplePlan;
use futaki::polynomial::{DiagonalField, HomogeneousPolynomial};
use futaki::rational::format_rational;
use futaki::report::build_report;
use futaki::{
    alpha_table, bando_futaki_closed, bando_futaki_coeff_route, run_identity_suite, Manifest,
};

#[derive(Parser)]
#[command(
    name = "futaki",
    about = "Bando-Futaki invariants of projective hypersurfaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ManifestArg {
    /// Path to a manifest JSON file.
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Args)]
struct PlanArgs {
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    /// Base RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Route {
    Closed,
    Coeff,
    Numeric,
    All,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PathArg {
    Auto,
    Linear,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact Chern-coefficient row alpha_{q,0..q} as rationals.
    Alpha {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: usize,
    },
    /// Compute the q-th invariant by the chosen route(s).
    Invariant {
        #[command(flatten)]
        manifest: ManifestArg,
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum, default_value_t = Route::All)]
        route: Route,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Run the pointwise identity suite at random points of the hypersurface.
    Verify {
        #[command(flatten)]
        manifest: ManifestArg,
        /// Accepted sample points for the suite.
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also run the finite-difference tiers (slower).
        #[arg(long)]
        fd: bool,
    },
    /// Monte Carlo calibration integrals and pointwise kappa statistics.
    Calibrate {
        #[command(flatten)]
        manifest: ManifestArg,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// The k-th Chen-Tian holomorphic invariant by direct integration.
    ChenTian {
        #[command(flatten)]
        manifest: ManifestArg,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Higher-order K-energy along an automorphism or linear metric path.
    Kenergy {
        #[command(flatten)]
        manifest: ManifestArg,
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum, default_value_t = PathArg::Auto)]
        path: PathArg,
        #[arg(long, default_value_t = 0.2)]
        t_end: f64,
        #[arg(long, default_value_t = 4)]
        t_steps: usize,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Full machine-readable report: all routes, calibration, identities.
    Report {
        #[command(flatten)]
        manifest: ManifestArg,
        /// Include every q (currently always on; kept for script stability).
        #[arg(long)]
        all: bool,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Accepted points for the identity tier of the report.
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Worker threads for the Monte Carlo layer (0 = library default).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[command(flatten)]
        plan: PlanArgs,
    },
}

/// Exit code contract: 1 = validation problem, 2 = numeric failure.
fn code_for(err: &Error) -> u8 {
    match err {
        Error::BudgetExhausted { .. }
        | Error::StencilFailure
        | Error::DegenerateFiber
        | Error::MultipleRoots(_)
        | Error::ChartDegenerate(_) => 2,
        _ => 1,
    }
}

fn load(manifest: &ManifestArg) -> Result<(Manifest, HomogeneousPolynomial, DiagonalField), Error> {
    let man = Manifest::from_path(&manifest.manifest)?;
    let (f, field_raw) = man.build()?;
    let (field, changed) = field_raw.normalized(f.d);
    if changed {
        eprintln!(
            "warning: field has nonzero trace; using normalized weights ({}) with kappa = {}",
            field
                .lambdas
                .iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(", "),
            format_rational(&field.kappa)
        );
    }
    Ok((man, f, field))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Alpha { n, d, q } => {
            let table = alpha_table(n, d, q)?;
            let row: Vec<String> = (0..=q).map(|k| format_rational(table.entry(q, k))).collect();
            println!("{}", row.join(", "));
        }
        Command::Invariant { manifest, q, route, plan } => {
            let (_, f, field) = load(&manifest)?;
            let sp = SamplePlan::new(plan.seed, plan.samples);
            let show_label = route == Route::All;
            if route == Route::Closed || route == Route::All {
                let v = bando_futaki_closed(f.n, f.d, q, &field.kappa)?;
                if show_label {
                    println!("closed: {}", format_rational(&v));
                } else {
                    println!("{}", format_rational(&v));
                }
            }
            if route == Route::Coeff || route == Route::All {
                let v = bando_futaki_coeff_route(f.n, f.d, q, &field.kappa)?;
                if show_label {
                    println!("coeff: {}", format_rational(&v));
                } else {
                    println!("{}", format_rational(&v));
                }
            }
            if route == Route::Numeric || route == Route::All {
                let est = futaki_numeric(&f, &field, q, &sp)?;
                let prefix = if show_label { "numeric: " } else { "" };
                println!(
                    "{prefix}{:.6} +- {:.6} (lambda_q {:.6} +- {:.6}, accepted {})",
                    est.value.mean.re,
                    est.value.stderr,
                    est.lambda.mean.re,
                    est.lambda.stderr,
                    est.value.accepted
                );
            }
        }
        Command::Verify { manifest, points, seed, fd } => {
            let (_, f, field) = load(&manifest)?;
            let res = run_identity_suite(&f, &field, seed, points, fd)?;
            for (name, residual, tol) in res.entries() {
                let verdict = if residual <= tol { "pass" } else { "FAIL" };
                println!("{name:26} {residual:12.3e}  (tol {tol:.0e})  {verdict}");
            }
            println!(
                "points: {} (rejected {}), overall: {}",
                res.points,
                res.rejected,
                if res.all_pass() { "pass" } else { "FAIL" }
            );
        }
        Command::Calibrate { manifest, plan } => {
            let (_, f, field) = load(&manifest)?;
            let sp = SamplePlan::new(plan.seed, plan.samples);
            let cal = calibrate(&f, &field, &sp)?;
            println!(
                "volume integral:       {:.6} +- {:.6} (expected {})",
                cal.degree.mean.re, cal.degree.stderr, cal.expected_degree
            );
            println!(
                "hamiltonian integral:  {:.6} +- {:.6} (expected {:.6})",
                cal.hamiltonian.mean.re, cal.hamiltonian.stderr, cal.expected_hamiltonian
            );
            println!(
                "pointwise kappa:       mean {:.12}, spread {:.3e} over {} points",
                cal.kappa_mean,
                cal.kappa_spread(),
                cal.kappa_points
            );
        }
        Command::ChenTian { manifest, k, plan } => {
            let (_, f, field) = load(&manifest)?;
            let sp = SamplePlan::new(plan.seed, plan.samples);
            let est = chen_tian(&f, &field, k, &sp)?;
            println!(
                "F_{k} = {:.6} +- {:.6}   (F_{k}/{} = {:.6})",
                est.mean.re,
                est.stderr,
                k + 1,
                est.mean.re / (k + 1) as f64
            );
        }
        Command::Kenergy { manifest, q, path, t_end, t_steps, plan } => {
            let (_, f, field) = load(&manifest)?;
            let sp = SamplePlan::new(plan.seed, plan.samples);
            let spec = PathSpec {
                kind: match path {
                    PathArg::Auto => PathKind::Automorphism,
                    PathArg::Linear => PathKind::Linear,
                },
                t_end,
                t_steps,
            };
            let ke = kenergy(&f, &field, q, &spec, &sp)?;
            println!(
                "M_{q} = {:.6} +- {:.6}  ({} quadrature nodes, volume {:.6})",
                ke.value, ke.stderr, ke.nodes, ke.volume.mean.re
            );
        }
        Command::Report { manifest, all: _, output, points, threads, plan } => {
            if threads > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()
                    .map_err(|e| Error::Domain(e.to_string()))?;
            }
            let (man, f, field_raw) = {
                let man = Manifest::from_path(&manifest.manifest)?;
                let (f, field_raw) = man.build()?;
                (man, f, field_raw)
            };
            let sp = SamplePlan::new(plan.seed, plan.samples);
            let doc = build_report(&man, &f, &field_raw, &sp, points)?;
            let text = doc.to_json()?;
            match output {
                Some(path) => std::fs::write(&path, text.as_bytes())
                    .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?,
                None => println!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(code_for(&err))
        }
    }
}
