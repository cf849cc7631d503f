//! Command-line front end: check a shape, scan the solution families, and
//! verify solutions by integrating the equations of motion.

// `!(x <= tol)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod input;
pub mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;

use sphere_re_core::dynamics::{verify_rigid_rotation, write_trajectory_csv, Trajectory};
use sphere_re_core::euler::{contour_scan, GridSpec};
use sphere_re_core::lagrange::isosceles_scan;
use sphere_re_core::{
    CartesianConfig, Classification, Error, MassTriple, PotentialRef, PotentialRegistry,
    ShapeAngles, SolverRegistry,
};

use input::{check_triangle, parse_masses, parse_sigma, SigmaInput};
use report::{num, write_contour_csv, write_isosceles_csv, write_json, ReReport, VerifyReport};

const EXIT_HELP: &str = "\
Exit codes:
  0  relative equilibrium found / verification passed
  1  invalid input
  2  not a relative equilibrium (or an excluded shape)
  3  integration blew up (collision approach)
  4  drift exceeded the configured bound

Angles are radians. Set SPHERE_RE_JOBS to change the default worker count.";

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Found = 0,
    BadInput = 1,
    NotAnRe = 2,
    BlowUp = 3,
    Drift = 4,
}

#[derive(Debug, Parser)]
#[command(name = "sphere-re", version, about = "Relative equilibria of three bodies on the unit sphere", after_help = EXIT_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Interaction model.
    #[arg(long, default_value = "cotangent")]
    pub potential: String,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "SPHERE_RE_JOBS", default_value_t = 0)]
    pub jobs: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output encoding; scans default to CSV, check and verify to JSON.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct VerifyOpts {
    /// Rotation periods to integrate; rotations slower than unit rate are
    /// followed for 2pi time units per period, a fixed point for this many
    /// time units.
    #[arg(long, default_value_t = 1.0)]
    pub periods: f64,
    /// Step size; min(1e-3, period / 1e4) when absent.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Largest allowed change of any cos(sigma_ij).
    #[arg(long, default_value_t = 1e-6)]
    pub max_drift: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a shape is a relative equilibrium.
    #[command(after_help = EXIT_HELP)]
    Check {
        /// m1,m2,m3
        #[arg(long)]
        masses: String,
        /// sigma12,sigma23,sigma31 in radians
        #[arg(long)]
        sigma: String,
        /// Solver tolerance; inferred from the typed precision when absent.
        #[arg(long)]
        tol: Option<f64>,
        /// Also integrate the solution.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        opts: VerifyOpts,
        #[command(flatten)]
        common: Common,
    },
    /// Trace collinear solutions on a rotating meridian over the (a, y) plane.
    #[command(after_help = EXIT_HELP)]
    EulerScan {
        #[arg(long, default_value = "1,1,1")]
        masses: String,
        /// Grid nodes per axis.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Equal-mass isosceles Lagrange family over sigma12 in (0, pi).
    #[command(after_help = EXIT_HELP)]
    LagrangeScan {
        /// Number of sigma12 intervals.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate a solution and check that it rotates rigidly.
    #[command(after_help = EXIT_HELP)]
    Verify {
        /// JSON report written by `check`.
        #[arg(long, conflicts_with_all = ["masses", "sigma"])]
        input: Option<PathBuf>,
        /// m1,m2,m3; solves the shape first instead of reading a report.
        #[arg(long, requires = "sigma")]
        masses: Option<String>,
        /// sigma12,sigma23,sigma31 in radians.
        #[arg(long, requires = "masses")]
        sigma: Option<String>,
        /// Solver tolerance for an inline solve.
        #[arg(long)]
        tol: Option<f64>,
        /// Multiplies omega^2 before launching, for sensitivity runs.
        #[arg(long, default_value_t = 1.0)]
        omega_sq_scale: f64,
        /// Writes the sampled trajectory as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[command(flatten)]
        opts: VerifyOpts,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Check { common, .. }
            | Command::EulerScan { common, .. }
            | Command::LagrangeScan { common, .. }
            | Command::Verify { common, .. } => common,
        }
    }
}

/// Error carrying the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::BadInput,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(format!("i/o error: {e}"))
    }
}

fn potential(name: &str) -> Result<PotentialRef, Failure> {
    PotentialRegistry::with_builtins()
        .get(name)
        .map_err(|e| Failure::input(e.to_string()))
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::input(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn classify_error(e: &Error) -> Option<Classification> {
    match e {
        Error::InvalidMass(_) | Error::InvalidArgument(_) => None,
        Error::DegenerateShape { .. } | Error::ExcludedShape(_) | Error::Domain(_) => {
            Some(Classification::Excluded)
        }
        _ => Some(Classification::NotAnRe),
    }
}

fn positions_array(c: &CartesianConfig) -> [[f64; 3]; 3] {
    c.positions().map(|v| [v.x, v.y, v.z])
}

fn verify_opts_valid(o: &VerifyOpts) -> Result<(), Failure> {
    if !(o.periods > 0.0 && o.periods.is_finite()) {
        return Err(Failure::input(format!(
            "--periods must be positive, got {}",
            o.periods
        )));
    }
    if let Some(dt) = o.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Failure::input(format!("--dt must be positive, got {dt}")));
        }
    }
    if !(o.max_drift > 0.0) {
        return Err(Failure::input(format!(
            "--max-drift must be positive, got {}",
            o.max_drift
        )));
    }
    Ok(())
}

/// Solves one shape; returns the report and its exit status.
pub fn check_shape(
    masses: &MassTriple,
    sigma: &SigmaInput,
    potential_name: &str,
    tol: Option<f64>,
) -> Result<(ReReport, Exit), Failure> {
    let p = potential(potential_name)?;
    let tol = tol.unwrap_or_else(|| sigma.default_tol());
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::input(format!("--tol must be positive, got {tol}")));
    }
    let mut rep = ReReport {
        classification: Classification::NotAnRe,
        masses: masses.as_array(),
        sigma: sigma.sigma,
        potential: p.name().to_owned(),
        tol,
        omega_sq: None,
        positions: None,
        solution: None,
        reason: None,
        residual: None,
        verification: None,
    };
    let shape = match ShapeAngles::from_angles(sigma.sigma[0], sigma.sigma[1], sigma.sigma[2]) {
        Ok(s) => s,
        Err(e) => {
            rep.classification = Classification::Excluded;
            rep.reason = Some(e.to_string());
            return Ok((rep, Exit::NotAnRe));
        }
    };
    check_triangle(sigma, &shape).map_err(Failure::input)?;
    match SolverRegistry::with_builtins().solve(masses, sigma.sigma, p.as_ref(), tol) {
        Ok(sol) => {
            rep.classification = sol.classification();
            rep.omega_sq = sol.omega_sq();
            rep.positions = Some(positions_array(&sol.positions()));
            rep.solution = Some(sol);
            Ok((rep, Exit::Found))
        }
        Err(e) => {
            let class = classify_error(&e).ok_or_else(|| Failure::input(e.to_string()))?;
            rep.classification = class;
            if let Error::NotAnRE { residual, .. } = &e {
                rep.residual = Some(*residual);
            }
            rep.reason = Some(e.to_string());
            Ok((rep, Exit::NotAnRe))
        }
    }
}

/// Integrates a launched rigid rotation and grades the drift.
pub fn verify_positions(
    positions: &[[f64; 3]; 3],
    masses: &MassTriple,
    potential_name: &str,
    omega_sq: f64,
    opts: &VerifyOpts,
) -> Result<(Trajectory, VerifyReport), Failure> {
    let p = potential(potential_name)?;
    if !(omega_sq >= 0.0 && omega_sq.is_finite()) {
        return Err(Failure::input(format!(
            "omega^2 must be non-negative, got {omega_sq}"
        )));
    }
    let c = CartesianConfig::from_unnormalized(positions.map(Vector3::from))
        .map_err(|e| Failure::input(e.to_string()))?;
    // slow rotations near a fixed point would otherwise run for very long
    // times; follow them for at most 2pi time units per requested period
    let periods = if omega_sq > 0.0 && omega_sq < 1.0 {
        opts.periods * omega_sq.sqrt()
    } else {
        opts.periods
    };
    let traj =
        verify_rigid_rotation(&c, masses, p.as_ref(), omega_sq, periods, opts.dt).map_err(|e| {
            match e {
                Error::BlowUp { .. } => Failure {
                    exit: Exit::BlowUp,
                    message: e.to_string(),
                },
                other => Failure::input(other.to_string()),
            }
        })?;
    let passed = traj.report.shape_drift <= opts.max_drift;
    let rep = VerifyReport {
        omega_sq,
        periods: opts.periods,
        max_drift: opts.max_drift,
        passed,
        report: traj.report,
    };
    Ok((traj, rep))
}

fn run_check(
    masses: &str,
    sigma: &str,
    tol: Option<f64>,
    verify: bool,
    opts: &VerifyOpts,
    common: &Common,
) -> Result<Exit, Failure> {
    let m = parse_masses(masses).map_err(Failure::input)?;
    let s = parse_sigma(sigma).map_err(Failure::input)?;
    if verify {
        verify_opts_valid(opts)?;
    }
    let (mut rep, mut exit) = check_shape(&m, &s, &common.potential, tol)?;
    if verify && exit == Exit::Found {
        if let (Some(q), Some(w)) = (rep.positions, rep.omega_sq) {
            match verify_positions(&q, &m, &common.potential, w, opts) {
                Ok((_, v)) => {
                    if !v.passed {
                        exit = Exit::Drift;
                    }
                    rep.verification = Some(v.report);
                }
                Err(f) if f.exit == Exit::BlowUp => {
                    rep.reason = Some(f.message);
                    exit = Exit::BlowUp;
                }
                Err(f) => return Err(f),
            }
        }
    }
    let mut w = sink(&common.out)?;
    match common.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&rep, &mut w)?,
        Format::Csv => {
            writeln!(
                w,
                "classification,m1,m2,m3,sigma12,sigma23,sigma31,omega_sq,residual"
            )?;
            let [m1, m2, m3] = rep.masses;
            let [s1, s2, s3] = rep.sigma;
            let opt = |x: Option<f64>| x.map_or(String::new(), num);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                rep.classification.as_str(),
                num(m1),
                num(m2),
                num(m3),
                num(s1),
                num(s2),
                num(s3),
                opt(rep.omega_sq),
                opt(rep.residual)
            )?;
        }
    }
    w.flush()?;
    Ok(exit)
}

fn run_euler_scan(masses: &str, grid: usize, common: &Common) -> Result<Exit, Failure> {
    let m = parse_masses(masses).map_err(Failure::input)?;
    let p = potential(&common.potential)?;
    let set = contour_scan(&m, p.as_ref(), GridSpec::square(grid))
        .map_err(|e| Failure::input(e.to_string()))?;
    let mut w = sink(&common.out)?;
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => write_contour_csv(&set, &mut w)?,
        Format::Json => write_json(&set, &mut w)?,
    }
    w.flush()?;
    Ok(Exit::Found)
}

fn run_lagrange_scan(grid: usize, common: &Common) -> Result<Exit, Failure> {
    if grid < 2 {
        return Err(Failure::input(format!(
            "--grid must be at least 2, got {grid}"
        )));
    }
    if common.potential != "cotangent" {
        return Err(Failure::input(
            "the isosceles family is tabulated for the cotangent potential only",
        ));
    }
    let rows = isosceles_scan(grid);
    let mut w = sink(&common.out)?;
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => write_isosceles_csv(&rows, &mut w)?,
        Format::Json => write_json(&rows, &mut w)?,
    }
    w.flush()?;
    Ok(Exit::Found)
}

fn read_report(path: &Path) -> Result<ReReport, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{} is not a check report: {e}", path.display())))
}

#[allow(clippy::too_many_arguments)]
fn run_verify(
    input: &Option<PathBuf>,
    masses: &Option<String>,
    sigma: &Option<String>,
    tol: Option<f64>,
    scale: f64,
    trajectory: &Option<PathBuf>,
    opts: &VerifyOpts,
    common: &Common,
) -> Result<Exit, Failure> {
    verify_opts_valid(opts)?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Failure::input(format!(
            "--omega-sq-scale must be positive, got {scale}"
        )));
    }
    let rep = match (input, masses, sigma) {
        (Some(path), _, _) => read_report(path)?,
        (None, Some(m), Some(s)) => {
            let m = parse_masses(m).map_err(Failure::input)?;
            let s = parse_sigma(s).map_err(Failure::input)?;
            let (rep, exit) = check_shape(&m, &s, &common.potential, tol)?;
            if exit != Exit::Found {
                return Err(Failure {
                    exit,
                    message: rep
                        .reason
                        .unwrap_or_else(|| "not a relative equilibrium".into()),
                });
            }
            rep
        }
        _ => {
            return Err(Failure::input(
                "give either --input or both --masses and --sigma",
            ))
        }
    };
    let (Some(q), Some(w)) = (rep.positions, rep.omega_sq) else {
        return Err(Failure {
            exit: Exit::NotAnRe,
            message: format!(
                "report is classified {} and has no solution",
                rep.classification.as_str()
            ),
        });
    };
    let m = MassTriple::from_array(rep.masses).map_err(|e| Failure::input(e.to_string()))?;
    let (traj, v) = verify_positions(&q, &m, &rep.potential, w * scale, opts)?;
    if let Some(path) = trajectory {
        let f = File::create(path)
            .map_err(|e| Failure::input(format!("cannot create {}: {e}", path.display())))?;
        let mut f = BufWriter::new(f);
        write_trajectory_csv(&traj, &mut f)?;
        f.flush()?;
    }
    let mut out = sink(&common.out)?;
    match common.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&v, &mut out)?,
        Format::Csv => {
            writeln!(
                out,
                "omega_sq,periods,dt,steps,energy_drift,angular_momentum_drift,shape_drift,passed"
            )?;
            let r = &v.report;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                num(v.omega_sq),
                num(v.periods),
                num(r.dt),
                r.steps,
                num(r.energy_drift),
                num(r.angular_momentum_drift),
                num(r.shape_drift),
                v.passed
            )?;
        }
    }
    out.flush()?;
    Ok(if v.passed { Exit::Found } else { Exit::Drift })
}

/// Runs a parsed command inside a worker pool of the requested size.
pub fn run(cli: &Cli) -> Result<Exit, Failure> {
    let jobs = cli.command.common().jobs;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::input(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Check {
            masses,
            sigma,
            tol,
            verify,
            opts,
            common,
        } => run_check(masses, sigma, *tol, *verify, opts, common),
        Command::EulerScan {
            masses,
            grid,
            common,
        } => run_euler_scan(masses, *grid, common),
        Command::LagrangeScan { grid, common } => run_lagrange_scan(*grid, common),
        Command::Verify {
            input,
            masses,
            sigma,
            tol,
            omega_sq_scale,
            trajectory,
            opts,
            common,
        } => run_verify(
            input,
            masses,
            sigma,
            *tol,
            *omega_sq_scale,
            trajectory,
            opts,
            common,
        ),
    })
}
