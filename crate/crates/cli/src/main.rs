use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value as Json};

use spherical_green_core::axial::{axial_reports, flat_identity_report};
use spherical_green_core::geodesic::{self, chord_expansion, geodesic_shoot, DEFAULT_SAMPLES};
use spherical_green_core::green::{
    coefficient_match, constant_report, moment_oracle_check, series_convergence_reports, Acceleration,
    GreenSpec, DEFAULT_CHECKPOINTS,
};
use spherical_green_core::hypersurface::{sample_points, surface_suite};
use spherical_green_core::mass::{decay_fit, fit_reports};
use spherical_green_core::report::{all_pass, reports_csv, reports_document, ResidualReport, SCHEMA};
use spherical_green_core::rigidity::rigidity_reports;
use spherical_green_core::spectrum::{kernel_status, near_pole, validate_order, OperatorOrder};
use spherical_green_core::surface::GraphSurface;
use spherical_green_core::Error;

#[derive(Parser)]
#[command(name = "spherical-green", version, about = "Verification runs for Green functions of GJMS operators on spheres")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Seed for randomized sample grids.
    #[arg(long, default_value_t = 7, global = true)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, ValueEnum)]
enum Accel {
    None,
    Cesaro,
    Euler,
}

impl From<Accel> for Acceleration {
    fn from(a: Accel) -> Self {
        match a {
            Accel::None => Acceleration::None,
            Accel::Cesaro => Acceleration::CesaroAveraging,
            Accel::Euler => Acceleration::EulerTransform,
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct OrderArgs {
    /// Fractional order 2*sigma.
    #[arg(long)]
    sigma: Option<f64>,
    /// Integer order 2k.
    #[arg(long)]
    k: Option<u32>,
    /// Order equal to the dimension.
    #[arg(long)]
    critical: bool,
}

impl OrderArgs {
    fn order(&self) -> OperatorOrder {
        match (self.sigma, self.k) {
            (Some(sigma), _) => OperatorOrder::Fractional { sigma },
            (_, Some(k)) => OperatorOrder::Integer { k },
            _ => OperatorOrder::Critical,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Green function constant with two independent evaluations.
    Constants {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        order: OrderArgs,
    },
    /// Coefficient matching, moment oracles and series convergence.
    GreenVerify {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        order: OrderArgs,
        #[arg(long, default_value_t = 10)]
        kmax: u32,
        /// Comma-separated x = -P.Q values.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0])]
        x: Vec<f64>,
        /// Number of series terms.
        #[arg(long = "K", default_value_t = 50_000)]
        big_k: usize,
        #[arg(long, value_enum, default_value_t = Accel::Cesaro)]
        accel: Accel,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Reject sigma within this distance of n/2 + m.
        #[arg(long, num_args = 0..=1, default_missing_value = "1e-3")]
        near_pole_guard: Option<f64>,
    },
    /// Exact orthogonality and eigenvalue checks for the axial operator.
    Axial {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 8)]
        kmax: u32,
    },
    /// Exact flat radial identity for log(1+r^2).
    FlatIdentity {
        #[arg(long)]
        n: u32,
    },
    /// Curvature identities, Green residuals and ray limits on a graph surface.
    Surface {
        file: PathBuf,
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Radius of the sampling ball; defaults to half the chart radius.
        #[arg(long)]
        radius: Option<f64>,
        /// Constant in the two-dimensional residual; fitted when omitted.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Mass of the inverted chart and its decay.
    Mass {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [20.0, 40.0, 80.0, 160.0])]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 32)]
        order: usize,
    },
    /// Chord expansion along a geodesic from the base point.
    Geodesic {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        v: Vec<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Write the (r, rho) trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exact series solution of the rigidity recursion.
    SeriesRigidity {
        /// Positive rational, e.g. 1/4.
        #[arg(long)]
        c0: String,
        #[arg(long = "N", default_value_t = 8)]
        big_n: usize,
    },
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Run = Result<(Vec<ResidualReport>, Option<Json>), Failure>;

fn threads_from_env() {
    if let Ok(v) = std::env::var("SPHERICAL_GREEN_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => {
                // only fails if a pool already exists
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => eprintln!("ignoring SPHERICAL_GREEN_THREADS={v}: expected a positive integer"),
        }
    }
}

fn load_surface(path: &Path) -> Result<GraphSurface, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(GraphSurface::from_json_str(&text)?)
}

fn parse_rational(s: &str) -> Result<BigRational, Failure> {
    s.trim()
        .parse::<BigRational>()
        .map_err(|e| Failure::Usage(format!("cannot parse {s:?} as a rational p/q: {e}")))
}

fn cmd_constants(n: u32, order: OperatorOrder) -> Run {
    let spec = GreenSpec::new(n, order)?;
    let r = constant_report(&spec)?;
    let value = r.metadata["constant"].clone();
    Ok((vec![r], Some(json!({ "constant": value, "kernel": kernel_status(n, spec.order)? }))))
}

#[allow(clippy::too_many_arguments)]
fn cmd_green_verify(
    n: u32,
    order: OperatorOrder,
    kmax: u32,
    xs: &[f64],
    big_k: usize,
    acc: Acceleration,
    tol: f64,
    guard: Option<f64>,
) -> Run {
    let order = validate_order(n, order)?;
    if let (Some(g), OperatorOrder::Fractional { sigma }) = (guard, order) {
        if near_pole(n, sigma, g).is_some() {
            return Err(Error::InvalidSigma { n, sigma, guard: g }.into());
        }
    }
    if !(tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    if big_k < 100 {
        return Err(Failure::Usage("--K must be at least 100".into()));
    }
    let spec = GreenSpec::new(n, order)?;
    let mut out = Vec::new();
    for k in spec.first_degree()..=kmax {
        out.push(moment_oracle_check(&spec, k)?);
        out.push(coefficient_match(&spec, k)?);
    }
    let mut checkpoints: Vec<usize> = DEFAULT_CHECKPOINTS.iter().copied().filter(|&c| c < big_k).collect();
    checkpoints.push(big_k);
    out.extend(series_convergence_reports(&spec, xs, &checkpoints, acc, tol)?);
    Ok((out, None))
}

fn cmd_surface(path: &Path, points: usize, radius: Option<f64>, c: Option<f64>, seed: u64) -> Run {
    let s = load_surface(path)?;
    let r = radius.unwrap_or(0.5 * s.radius().min(2.0));
    if !(r > 0.0) || r >= s.radius() {
        return Err(Failure::Usage(format!("sampling radius {r} must lie in (0, {}) ", s.radius())));
    }
    if points == 0 {
        return Err(Failure::Usage("--points must be positive".into()));
    }
    let pts = sample_points(&s, r, points, seed);
    let reports = surface_suite(&s, &pts, c)?;
    Ok((reports, Some(json!({ "surface": s.to_json(), "sample_radius": r, "seed": seed }))))
}

fn cmd_mass(path: &Path, radii: &[f64], order: usize) -> Run {
    let s = load_surface(path)?;
    let fit = decay_fit(&s, radii, order)?;
    let reports = fit_reports(&s, &fit);
    Ok((
        reports,
        Some(json!({
            "exponent": fit.exponent,
            "predicted_exponent": fit.predicted_exponent,
            "extrapolated_mass": fit.extrapolated_mass,
            "monotone": fit.monotone,
        })),
    ))
}

fn cmd_geodesic(path: &Path, v: &[f64], r_max: Option<f64>, samples: usize, tol: f64, trace: Option<&Path>) -> Run {
    let s = load_surface(path)?;
    if v.len() != s.dim() {
        return Err(Failure::Usage(format!("--v needs {} components, got {}", s.dim(), v.len())));
    }
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Failure::Usage("--v must be nonzero".into()));
    }
    let v: Vec<f64> = v.iter().map(|a| a / norm).collect();
    let r_max = r_max.unwrap_or(geodesic::DEFAULT_R_MAX.min(0.9 * s.radius()));
    let c = chord_expansion(&s, &v, r_max, samples)?;
    let report = ResidualReport::real("chord_expansion", (c.c4 - c.target).abs(), 0.0, tol)
        .with("surface", s.label())
        .with("v", &v)
        .with("r_max", r_max)
        .with("samples", samples)
        .with("c4", c.c4)
        .with("c4_target", c.target)
        .with("second_form", c.second_form)
        .with("c4_by_cut", &c.c4_by_cut)
        .with("max_drift", c.max_drift);
    if let Some(p) = trace {
        let t = geodesic_shoot(&s, &v, r_max, samples)?;
        let mut csv = String::from("r,rho\n");
        for smp in &t.samples {
            csv.push_str(&format!("{:?},{:?}\n", smp.r, smp.rho));
        }
        fs::write(p, csv).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok((vec![report], None))
}

fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::Constants { n, order } => cmd_constants(*n, order.order()),
        Command::GreenVerify { n, order, kmax, x, big_k, accel, tol, near_pole_guard } => {
            cmd_green_verify(*n, order.order(), *kmax, x, *big_k, (*accel).into(), *tol, *near_pole_guard)
        }
        Command::Axial { n, kmax } => Ok((axial_reports(*n, *kmax)?, None)),
        Command::FlatIdentity { n } => Ok((vec![flat_identity_report(*n)?], None)),
        Command::Surface { file, points, radius, c } => cmd_surface(file, *points, *radius, *c, cli.seed),
        Command::Mass { file, radii, order } => cmd_mass(file, radii, *order),
        Command::Geodesic { file, v, r_max, samples, tol, trace } => {
            cmd_geodesic(file, v, *r_max, *samples, *tol, trace.as_deref())
        }
        Command::SeriesRigidity { c0, big_n } => Ok((rigidity_reports(&parse_rational(c0)?, *big_n)?, None)),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Constants { .. } => "constants",
        Command::GreenVerify { .. } => "green-verify",
        Command::Axial { .. } => "axial",
        Command::FlatIdentity { .. } => "flat-identity",
        Command::Surface { .. } => "surface",
        Command::Mass { .. } => "mass",
        Command::Geodesic { .. } => "geodesic",
        Command::SeriesRigidity { .. } => "series-rigidity",
    }
}

fn pretty(reports: &[ResidualReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in reports {
        let value = match r.value.rational() {
            Some(q) => format!("{q} (exact)"),
            None => r.value.decimal(),
        };
        let status = if r.pass { "PASS" } else { "FAIL" };
        out.push_str(&format!("{status}  {:width$}  {value}\n", r.name));
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    out.push_str(&format!("{passed}/{} passed\n", reports.len()));
    out
}

fn emit_error(command: &str, format: Format, kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("error: {message}");
    if format == Format::Json {
        let doc = json!({
            "schema": SCHEMA,
            "command": command,
            "error": { "kind": kind, "message": message, "exit_code": code },
        });
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    threads_from_env();
    let name = command_name(&cli.command);
    match run(&cli) {
        Ok((reports, extra)) => {
            match cli.format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&reports_document(name, &reports, extra)).unwrap())
                }
                Format::Csv => print!("{}", reports_csv(&reports)),
                Format::Pretty => print!("{}", pretty(&reports)),
            }
            if all_pass(&reports) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(m)) => emit_error(name, cli.format, "usage", &m, 2),
        Err(Failure::Core(e)) => {
            let code = if e.is_numerical() { 3 } else { 2 };
            emit_error(name, cli.format, e.kind(), &e.to_string(), code)
        }
    }
}
