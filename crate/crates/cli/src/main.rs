//! Command-line front end: evaluates the potential, the obstacle fibers,
//! the Levi certification, fiber monodromy, fiberwise Schwarzians, and the
//! rigidity certificate, emitting JSON or CSV artifacts for plotting.
//!
//! Exit codes: 0 success, 2 negative certification/verdict, 3 invalid input.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use skewcyl::brset::{BasePoint, DiscFibration};
use skewcyl::fiber::{log_chart_witness, FiberChart, PathPolyline};
use skewcyl::levi::{find_min_a, GridSpec, LeviForm};
use skewcyl::potential::LogPotential;
use skewcyl::rigidity::{
    blaschke_bound, family_by_name, run_certificate, vanishing_propagation, CandidateFamily,
    CertificateOptions, Verdict,
};
use skewcyl::schwarzian::{schwarzian, schwarzian_fd};

#[derive(Parser)]
#[command(name = "skewcyl", version, about = "Fibered obstacle set laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// The harmonic potential with logarithmic singularities.
    Potential {
        #[command(subcommand)]
        cmd: PotentialCmd,
    },
    /// The obstacle set: per-fiber discs.
    Set {
        #[command(subcommand)]
        cmd: SetCmd,
    },
    /// Boundary Levi form certification.
    Levi {
        #[command(subcommand)]
        cmd: LeviCmd,
    },
    /// Analytic continuation of the logarithm along fiber loops.
    Fiber {
        #[command(subcommand)]
        cmd: FiberCmd,
    },
    /// Fiberwise Schwarzian of a canned candidate family.
    Schwarzian {
        #[command(subcommand)]
        cmd: SchwarzianCmd,
    },
    /// Identity-theorem bounds and the obstruction certificate.
    Rigidity {
        #[command(subcommand)]
        cmd: RigidityCmd,
    },
}

#[derive(Subcommand)]
enum PotentialCmd {
    /// Evaluate u at one point.
    Eval {
        /// Base point: rational `p/q`, real `x`, or complex `re,im`.
        #[arg(long, value_parser = parse_base_point, allow_hyphen_values = true)]
        z: BasePoint,
        /// Series truncation index.
        #[arg(long = "N", default_value_t = 53)]
        truncation: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample u on a cell-center grid over the unit disc (CSV).
    Grid {
        #[arg(long, value_parser = parse_grid, default_value = "64x64")]
        grid: (usize, usize),
        #[arg(long = "N", default_value_t = 53)]
        truncation: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SetCmd {
    /// Describe the fiber over one base point (JSON).
    Fiber {
        #[arg(long, value_parser = parse_base_point, allow_hyphen_values = true)]
        z: BasePoint,
        #[arg(long = "A", default_value_t = 10.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fiber descriptors on a cell-center grid (CSV).
    Grid {
        #[arg(long, value_parser = parse_grid, default_value = "64x64")]
        grid: (usize, usize),
        #[arg(long = "A", default_value_t = 10.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct LeviGridArgs {
    #[arg(long = "A", default_value_t = 10.0, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, value_parser = parse_grid, default_value = "64x64")]
    grid: (usize, usize),
    #[arg(long, default_value_t = 32)]
    angles: usize,
    /// Half-width of the exclusion strips; accepts rationals like `1/48`.
    #[arg(long, value_parser = parse_real, default_value = "1/48")]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    margin: f64,
    /// Worker threads for the grid sweep (default: rayon's choice).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum LeviCmd {
    /// Sweep the boundary grid and certify min H >= margin.
    Certify {
        #[command(flatten)]
        grid: LeviGridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also dump every (z, theta, H) sample as CSV.
        #[arg(long)]
        dump_grid: Option<PathBuf>,
    },
    /// Bisect for the smallest A the grid certifies.
    FindA {
        #[arg(long, default_value_t = -30.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 30.0, allow_hyphen_values = true)]
        hi: f64,
        #[command(flatten)]
        grid: LeviGridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FiberCmd {
    /// Continue ln w along a loop in one fiber and report the witness.
    Monodromy {
        #[arg(long, value_parser = parse_base_point, allow_hyphen_values = true)]
        z: BasePoint,
        #[arg(long = "A", default_value_t = 10.0, allow_hyphen_values = true)]
        a: f64,
        /// Loop vertices `re,im;re,im;...` (closed automatically).
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["center", "radius", "turns", "segments"])]
        path: Option<String>,
        #[arg(long, value_parser = parse_base_point, default_value = "0", allow_hyphen_values = true)]
        center: BasePoint,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        turns: i32,
        #[arg(long, default_value_t = 96)]
        segments: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SchwarzianCmd {
    /// Fiberwise Schwarzian of a canned family at (z, zeta).
    Eval {
        #[arg(long, default_value = "moebius-in-log")]
        family: String,
        #[arg(long, value_parser = parse_base_point, allow_hyphen_values = true)]
        z: BasePoint,
        /// Chart point; defaults to the log of the transversal level.
        #[arg(long, value_parser = parse_base_point, allow_hyphen_values = true)]
        zeta: Option<BasePoint>,
        #[arg(long = "A", default_value_t = 10.0, allow_hyphen_values = true)]
        a: f64,
        /// Also extract the Schwarzian by finite differences at this step.
        #[arg(long)]
        fd_step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RigidityCmd {
    /// Blaschke vanishing bound at a point, optionally scaled by a sup.
    Bound {
        #[arg(long, value_parser = parse_base_point, allow_hyphen_values = true)]
        z: BasePoint,
        #[arg(long = "N", default_value_t = 25)]
        count: usize,
        /// Sup bound to propagate; omit for the bare Blaschke product.
        #[arg(long)]
        sup: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full obstruction pipeline on a canned family.
    Certificate {
        #[arg(long)]
        family: String,
        #[arg(long = "N", default_value_t = 25)]
        count: usize,
        #[arg(long = "A", default_value_t = 10.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol_zero: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol_cr: f64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_base_point(s: &str) -> Result<BasePoint, skewcyl::Error> {
    BasePoint::from_str(s)
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (nx, ny) = s.split_once('x').ok_or_else(|| format!("expected NXxNY, got `{s}`"))?;
    let nx = nx.parse().map_err(|e| format!("bad grid width `{nx}`: {e}"))?;
    let ny = ny.parse().map_err(|e| format!("bad grid height `{ny}`: {e}"))?;
    Ok((nx, ny))
}

/// Real number, accepting exact rationals like `1/48`.
fn parse_real(s: &str) -> Result<f64, String> {
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.trim().parse().map_err(|e| format!("bad numerator `{p}`: {e}"))?;
        let q: f64 = q.trim().parse().map_err(|e| format!("bad denominator `{q}`: {e}"))?;
        if q == 0.0 {
            return Err("zero denominator".into());
        }
        return Ok(p / q);
    }
    s.parse().map_err(|e| format!("bad number `{s}`: {e}"))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(3);
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    match cli.cmd {
        Command::Potential { cmd } => run_potential(cmd),
        Command::Set { cmd } => run_set(cmd),
        Command::Levi { cmd } => run_levi(cmd),
        Command::Fiber { cmd } => run_fiber(cmd),
        Command::Schwarzian { cmd } => run_schwarzian(cmd),
        Command::Rigidity { cmd } => run_rigidity(cmd),
    }
}

/// Resolve an output path against `SKEWCYL_OUT_DIR` when relative.
fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os("SKEWCYL_OUT_DIR") {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_artifact(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            let path = resolve_out(path);
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Serialize a report with the schema version stamped in. Keys come out
/// sorted, which also makes the byte output independent of field order.
fn emit_json<T: Serialize>(report: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let mut value = serde_json::to_value(report)?;
    value
        .as_object_mut()
        .context("artifact must serialize to a JSON object")?
        .insert("schema_version".into(), skewcyl::SCHEMA_VERSION.into());
    let text = serde_json::to_string_pretty(&value)? + "\n";
    write_artifact(&text, out)
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Cell centers of an nx-by-ny grid over [-1,1]^2, restricted to the open
/// disc, row-major from the bottom-left.
fn disc_grid(nx: usize, ny: usize) -> Vec<Complex64> {
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let x = -1.0 + (i as f64 + 0.5) * 2.0 / nx as f64;
            let y = -1.0 + (j as f64 + 0.5) * 2.0 / ny as f64;
            let z = Complex64::new(x, y);
            if z.norm_sqr() < 1.0 {
                cells.push(z);
            }
        }
    }
    cells
}

#[derive(Serialize)]
struct PotentialReport {
    z_re: f64,
    z_im: f64,
    truncation: usize,
    value: f64,
    tail_bound: f64,
}

fn run_potential(cmd: PotentialCmd) -> anyhow::Result<i32> {
    match cmd {
        PotentialCmd::Eval { z, truncation, out } => {
            let pot = LogPotential::new(truncation);
            let zc = z.to_complex();
            let v = pot.eval(zc)?;
            emit_json(
                &PotentialReport {
                    z_re: zc.re,
                    z_im: zc.im,
                    truncation,
                    value: v.value,
                    tail_bound: v.tail_bound,
                },
                out.as_deref(),
            )?;
            Ok(0)
        }
        PotentialCmd::Grid { grid: (nx, ny), truncation, out } => {
            let pot = LogPotential::new(truncation);
            let mut csv = String::from("z_re,z_im,u,tail_bound\n");
            for z in disc_grid(nx, ny) {
                // rows where u or the bound is undefined are omitted
                let Ok(v) = pot.eval(z) else { continue };
                if !v.value.is_finite() || !v.tail_bound.is_finite() {
                    continue;
                }
                csv.push_str(&format!("{},{},{},{}\n", z.re, z.im, v.value, v.tail_bound));
            }
            write_artifact(&csv, out.as_deref())?;
            Ok(0)
        }
    }
}

fn run_set(cmd: SetCmd) -> anyhow::Result<i32> {
    match cmd {
        SetCmd::Fiber { z, a, out } => {
            let fib = DiscFibration::with_a(a);
            let descriptor = fib.fiber(z)?;
            emit_json(&descriptor, out.as_deref())?;
            Ok(0)
        }
        SetCmd::Grid { grid: (nx, ny), a, out } => {
            let fib = DiscFibration::with_a(a);
            let mut csv = String::from("z_re,z_im,center_re,center_im,radius,degenerate\n");
            for z in disc_grid(nx, ny) {
                let f = fib.fiber(z)?;
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    f.z.re, f.z.im, f.center.re, f.center.im, f.radius, f.degenerate
                ));
            }
            write_artifact(&csv, out.as_deref())?;
            Ok(0)
        }
    }
}

fn grid_spec(args: &LeviGridArgs) -> GridSpec {
    GridSpec {
        nx: args.grid.0,
        ny: args.grid.1,
        theta_count: args.angles,
        epsilon: args.eps,
    }
}

fn run_levi(cmd: LeviCmd) -> anyhow::Result<i32> {
    match cmd {
        LeviCmd::Certify { grid, out, dump_grid } => {
            let spec = grid_spec(&grid);
            let levi = LeviForm::with_a(grid.a);
            let report = with_pool(grid.workers, || levi.certify(&spec, grid.margin))??;
            if let Some(path) = dump_grid {
                let samples = with_pool(grid.workers, || levi.grid_samples(&spec))??;
                let mut csv = String::from("z_re,z_im,theta,H\n");
                for s in samples {
                    csv.push_str(&format!("{},{},{},{}\n", s.z.re, s.z.im, s.theta, s.h));
                }
                write_artifact(&csv, Some(&path))?;
            }
            emit_json(&report, out.as_deref())?;
            Ok(if report.certified { 0 } else { 2 })
        }
        LeviCmd::FindA { lo, hi, grid, out } => {
            let spec = grid_spec(&grid);
            let margin = grid.margin;
            let result = with_pool(grid.workers, move || find_min_a(lo, hi, &spec, margin))??;
            emit_json(&result, out.as_deref())?;
            Ok(0)
        }
    }
}

fn parse_path(text: &str) -> anyhow::Result<Vec<Complex64>> {
    let mut vertices = Vec::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        vertices.push(BasePoint::from_str(part)?.to_complex());
    }
    if vertices.len() < 2 {
        bail!("a loop needs at least two vertices, got {}", vertices.len());
    }
    if vertices.first() != vertices.last() {
        vertices.push(vertices[0]);
    }
    Ok(vertices)
}

fn run_fiber(cmd: FiberCmd) -> anyhow::Result<i32> {
    match cmd {
        FiberCmd::Monodromy { z, a, path, center, radius, turns, segments, out } => {
            let fib = DiscFibration::with_a(a);
            let chart = FiberChart::new(fib.fiber(z)?);
            let loop_path = match path {
                Some(text) => PathPolyline::new(parse_path(&text)?)?,
                None => PathPolyline::circle(center.to_complex(), radius, turns, segments),
            };
            let witness = log_chart_witness(&chart, &loop_path)?;
            emit_json(&witness, out.as_deref())?;
            Ok(0)
        }
    }
}

#[derive(Serialize)]
struct SchwarzianReport {
    family: String,
    z_re: f64,
    z_im: f64,
    zeta_re: f64,
    zeta_im: f64,
    s_re: f64,
    s_im: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_fd_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_fd_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_error: Option<f64>,
}

fn run_schwarzian(cmd: SchwarzianCmd) -> anyhow::Result<i32> {
    match cmd {
        SchwarzianCmd::Eval { family, z, zeta, a, fd_step, out } => {
            let fam = family_by_name(&family)?;
            let zc = z.to_complex();
            let zeta = match zeta {
                Some(p) => p.to_complex(),
                None => Complex64::new(DiscFibration::with_a(a).transversal_level().ln(), 0.0),
            };
            let s = schwarzian(&fam.zeta_jet(zc, zeta)?)?;
            let mut report = SchwarzianReport {
                family,
                z_re: zc.re,
                z_im: zc.im,
                zeta_re: zeta.re,
                zeta_im: zeta.im,
                s_re: s.re,
                s_im: s.im,
                s_fd_re: None,
                s_fd_im: None,
                fd_error: None,
            };
            if let Some(step) = fd_step {
                let fd = schwarzian_fd(|w| fam.eval(zc, w).unwrap_or(Complex64::new(f64::NAN, 0.0)), zeta, step)?;
                report.s_fd_re = Some(fd.value.re);
                report.s_fd_im = Some(fd.value.im);
                report.fd_error = Some(fd.error_estimate);
            }
            emit_json(&report, out.as_deref())?;
            Ok(0)
        }
    }
}

#[derive(Serialize)]
struct BoundReport {
    z_re: f64,
    z_im: f64,
    count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup: Option<f64>,
    bound: f64,
}

fn run_rigidity(cmd: RigidityCmd) -> anyhow::Result<i32> {
    match cmd {
        RigidityCmd::Bound { z, count, sup, out } => {
            let zc = z.to_complex();
            let bound = match sup {
                Some(m) => vanishing_propagation(m, count, zc)?,
                None => blaschke_bound(zc, count)?,
            };
            emit_json(
                &BoundReport { z_re: zc.re, z_im: zc.im, count, sup, bound },
                out.as_deref(),
            )?;
            Ok(0)
        }
        RigidityCmd::Certificate { family, count, a, tol_zero, tol_cr, workers, out } => {
            let fam = family_by_name(&family)?;
            let fam: &dyn CandidateFamily = fam.as_ref();
            let opts = CertificateOptions { count, tol_zero, tol_cr, a };
            let report = with_pool(workers, || run_certificate(fam, &opts))??;
            let code = if report.verdict == Verdict::ContradictionFound { 0 } else { 2 };
            emit_json(&report, out.as_deref())?;
            Ok(code)
        }
    }
}
