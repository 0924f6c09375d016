//! Command-line front end. Exit codes: 0 ok, 2 usage or parse error,
//! 3 numerical failure, 4 model precondition failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::envelope::{build_envelope, concave_envelope, convex_intervals};
use crate::error::{Error, Result};
use crate::gam::{gam_relaxation_min, Mpgam};
use crate::io::{self, format_f64};
use crate::oracles::{gam_grid_min, multistart_min};
use crate::pkan::{build_relaxation, Pkan};
use crate::poly::{Interval, Polynomial};
use crate::solver::{relative_gap, solve_relaxation, SolveStatus, DEFAULT_FEAS_TOL, DEFAULT_MAX_ITERS};

pub const DEFAULT_TOL: f64 = 1e-12;
/// Grid points per axis used by `gam check`.
pub const GAM_GRID_POINTS: usize = 200;
/// Relative tolerance of `gam check`.
pub const GAM_CHECK_TOL: f64 = 1e-5;
/// Slack allowed in `f_relax <= f_upper` for `pkan gap`.
pub const SANDWICH_SLACK: f64 = 1e-6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kanvex", version, about = "Convex envelopes of polynomials and relaxations of polynomial KANs")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convex and concave envelopes of one polynomial.
    Envelope(EnvelopeArgs),
    /// Random PKAN instances, relaxations and gap batches.
    #[command(subcommand)]
    Pkan(PkanCommand),
    /// Monotone polynomial GAMs.
    #[command(subcommand)]
    Gam(GamCommand),
}

#[derive(Debug, Args)]
struct EnvelopeArgs {
    /// Ascending coefficients, e.g. "0,1.5,1.3".
    #[arg(long, allow_hyphen_values = true)]
    coeffs: String,
    #[arg(long, required = true, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    interval: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Envelope JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV of samples (x, p, convex envelope, concave envelope).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1001)]
    samples: usize,
}

#[derive(Debug, Subcommand)]
enum PkanCommand {
    /// Write random instances for an architecture grid.
    Gen(GenArgs),
    /// Relax one instance and bound its minimum from below.
    Relax(RelaxArgs),
    /// Relaxation bound against a multistart upper bound, per instance.
    Gap(GapArgs),
}

#[derive(Debug, Args)]
struct ArchArgs {
    /// Hidden layer counts (comma-separated).
    #[arg(long, value_delimiter = ',', default_values_t = [4])]
    layers: Vec<usize>,
    /// Hidden layer widths.
    #[arg(long, value_delimiter = ',', default_values_t = [4])]
    width: Vec<usize>,
    /// Input dimensions.
    #[arg(long, value_delimiter = ',', default_values_t = [4])]
    inputs: Vec<usize>,
    /// Polynomial degrees.
    #[arg(long, value_delimiter = ',', default_values_t = [4])]
    degree: Vec<usize>,
    /// First instance seed; instance k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instances per architecture.
    #[arg(long, default_value_t = 50)]
    count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Arch {
    layers: usize,
    width: usize,
    inputs: usize,
    degree: usize,
}

impl ArchArgs {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("--layers", &self.layers),
            ("--width", &self.width),
            ("--inputs", &self.inputs),
            ("--degree", &self.degree),
        ] {
            if v.is_empty() || v.contains(&0) {
                return Err(Error::parse(name, "values must be positive"));
            }
        }
        Ok(())
    }

    fn grid(&self) -> Vec<Arch> {
        let mut out = Vec::new();
        for &layers in &self.layers {
            for &width in &self.width {
                for &inputs in &self.inputs {
                    for &degree in &self.degree {
                        out.push(Arch {
                            layers,
                            width,
                            inputs,
                            degree,
                        });
                    }
                }
            }
        }
        out
    }

    fn instances(&self) -> Vec<(Arch, u64)> {
        self.grid()
            .into_iter()
            .flat_map(|a| (0..self.count as u64).map(move |k| (a, self.seed + k)))
            .collect()
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    arch: ArchArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RelaxArgs {
    /// Instance JSON.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_FEAS_TOL)]
    feas_tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Report JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GapArgs {
    #[command(flatten)]
    arch: ArchArgs,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_FEAS_TOL)]
    feas_tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Multistart sample count.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Result CSV; timings go to `<out>.timing.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum GamCommand {
    /// Compare the relaxation minimum with a grid oracle.
    Check(GamCheckArgs),
}

#[derive(Debug, Args)]
struct GamCheckArgs {
    /// Model JSON `{ "components", "link", "box" }`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Envelope(a) => cmd_envelope(&a),
        Command::Pkan(PkanCommand::Gen(a)) => cmd_gen(&a),
        Command::Pkan(PkanCommand::Relax(a)) => cmd_relax(&a),
        Command::Pkan(PkanCommand::Gap(a)) => cmd_gap(&a),
        Command::Gam(GamCommand::Check(a)) => cmd_gam(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidInterval { .. } | Error::DimensionMismatch { .. } | Error::Io(_) => EXIT_USAGE,
        Error::NotMonotone { .. } => EXIT_PRECONDITION,
        _ => EXIT_NUMERIC,
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::parse(name, format!("must be positive, got {v}")))
    }
}

/// Fails early when the directory that would hold `path` is missing.
fn check_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(Error::Io(format!("output directory {} does not exist", dir.display())))
        }
        _ => Ok(()),
    }
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn cmd_envelope(a: &EnvelopeArgs) -> Result<i32> {
    positive("--tol", a.tol)?;
    let p: Polynomial = a.coeffs.parse()?;
    let interval = Interval::new(a.interval[0], a.interval[1])?;
    if interval.is_degenerate() {
        return Err(Error::InvalidInterval {
            lo: interval.lo,
            hi: interval.hi,
        });
    }
    for path in a.out.iter().chain(&a.csv) {
        check_output(path)?;
    }
    if a.csv.is_some() && a.samples < 2 {
        return Err(Error::parse("--samples", "need at least 2 samples"));
    }

    let cis = convex_intervals(&p, interval, a.tol)?;
    let env = build_envelope(&p, interval, a.tol)?;
    let bts = env.bitangents();
    if bts.is_empty() {
        println!("0 bitangents; envelope = p");
    } else {
        println!("{} bitangent{}", bts.len(), if bts.len() == 1 { "" } else { "s" });
        for b in bts {
            println!(
                "slope {:.6} intercept {:.6} touches {:.6} {:.6}",
                b.slope, b.intercept, b.left_touch, b.right_touch
            );
        }
    }
    println!("{} convex intervals", cis.len());

    if let Some(out) = &a.out {
        io::write_atomic(out, env.to_json()?.as_bytes())?;
    }
    if let Some(csv) = &a.csv {
        let upper = concave_envelope(&p, interval, a.tol)?;
        let n = a.samples;
        let rows: Vec<Vec<String>> = (0..n)
            .map(|k| {
                let x = if k == n - 1 {
                    interval.hi
                } else {
                    interval.lo + interval.width() * k as f64 / (n - 1) as f64
                };
                vec![
                    format_f64(x),
                    format_f64(p.eval(x)),
                    format_f64(env.eval_clamped(x)),
                    format_f64(upper.eval_clamped(x)),
                ]
            })
            .collect();
        io::write_atomic(csv, io::csv_string(&["x", "p", "env", "concave_env"], &rows)?.as_bytes())?;
    }
    Ok(EXIT_OK)
}

fn instance_name(arch: Arch, seed: u64) -> String {
    format!(
        "pkan_L{}_W{}_I{}_N{}_s{}.json",
        arch.layers, arch.width, arch.inputs, arch.degree, seed
    )
}

fn cmd_gen(a: &GenArgs) -> Result<i32> {
    a.arch.validate()?;
    fs::create_dir_all(&a.out).map_err(|e| Error::Io(format!("{}: {e}", a.out.display())))?;
    let instances = a.arch.instances();
    for &(arch, seed) in &instances {
        let net = Pkan::generate_random(arch.layers, arch.width, arch.inputs, arch.degree, seed);
        io::write_atomic(&a.out.join(instance_name(arch, seed)), net.to_json()?.as_bytes())?;
    }
    println!("wrote {} instances to {}", instances.len(), a.out.display());
    Ok(EXIT_OK)
}

fn cmd_relax(a: &RelaxArgs) -> Result<i32> {
    positive("--tol", a.tol)?;
    positive("--feas-tol", a.feas_tol)?;
    if a.max_iters == 0 {
        return Err(Error::parse("--max-iters", "must be at least 1"));
    }
    if let Some(out) = &a.out {
        check_output(out)?;
    }
    let net = Pkan::from_json(&read_input(&a.model)?)?;
    let problem = build_relaxation(&net, a.tol)?;
    let report = solve_relaxation(&problem, a.feas_tol, a.max_iters)?;
    println!(
        "lower_bound {:.9} status {} iterations {} max_violation {:.3e}",
        report.lower_bound, report.status, report.iterations, report.max_violation
    );
    if let Some(out) = &a.out {
        io::write_atomic(out, report.to_json(&problem)?.as_bytes())?;
    }
    Ok(if report.lower_bound.is_finite() { EXIT_OK } else { EXIT_NUMERIC })
}

/// One row of a gap batch.
#[derive(Debug, Clone)]
struct GapRow {
    arch: Arch,
    seed: u64,
    status: String,
    f_relax: f64,
    f_upper: f64,
    gap: f64,
    iterations: usize,
    construct_s: f64,
    solve_s: f64,
    upper_s: f64,
}

impl GapRow {
    fn sandwich_ok(&self) -> bool {
        self.f_relax.is_finite() && self.f_upper.is_finite() && self.f_relax <= self.f_upper + SANDWICH_SLACK
    }
}

fn gap_instance(a: &GapArgs, arch: Arch, seed: u64) -> GapRow {
    let net = Pkan::generate_random(arch.layers, arch.width, arch.inputs, arch.degree, seed);
    let mut row = GapRow {
        arch,
        seed,
        status: String::new(),
        f_relax: f64::NAN,
        f_upper: f64::NAN,
        gap: f64::NAN,
        iterations: 0,
        construct_s: 0.0,
        solve_s: 0.0,
        upper_s: 0.0,
    };
    let t = Instant::now();
    let relaxed = build_relaxation(&net, a.tol);
    row.construct_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let report = relaxed.and_then(|p| solve_relaxation(&p, a.feas_tol, a.max_iters));
    row.solve_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    row.f_upper = multistart_min(&net, a.samples, seed).0;
    row.upper_s = t.elapsed().as_secs_f64();
    match report {
        Ok(r) => {
            row.status = r.status.to_string();
            row.f_relax = r.lower_bound;
            row.iterations = r.iterations;
            if r.status == SolveStatus::InfeasibleMaster {
                row.f_relax = f64::NAN;
            }
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row.gap = relative_gap(row.f_relax, row.f_upper);
    row
}

fn cmd_gap(a: &GapArgs) -> Result<i32> {
    a.arch.validate()?;
    positive("--tol", a.tol)?;
    positive("--feas-tol", a.feas_tol)?;
    if a.max_iters == 0 || a.samples == 0 || a.jobs == 0 {
        return Err(Error::parse("--max-iters/--samples/--jobs", "must be at least 1"));
    }
    check_output(&a.out)?;
    let instances = a.arch.instances();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let rows: Vec<GapRow> = pool.install(|| {
        instances
            .par_iter()
            .map(|&(arch, seed)| gap_instance(a, arch, seed))
            .collect()
    });

    let arch_cols = |r: &GapRow| {
        vec![
            r.arch.layers.to_string(),
            r.arch.width.to_string(),
            r.arch.inputs.to_string(),
            r.arch.degree.to_string(),
            r.seed.to_string(),
        ]
    };
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = arch_cols(r);
            v.extend([
                r.status.clone(),
                format_f64(r.f_relax),
                format_f64(r.f_upper),
                format_f64(r.gap),
                r.iterations.to_string(),
                r.sandwich_ok().to_string(),
            ]);
            v
        })
        .collect();
    let timing: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = arch_cols(r);
            v.extend([format!("{:.6}", r.construct_s), format!("{:.6}", r.solve_s), format!("{:.6}", r.upper_s)]);
            v
        })
        .collect();
    let head = ["layers", "width", "inputs", "degree", "seed"];
    let mut main_head = head.to_vec();
    main_head.extend(["status", "f_relax", "f_upper", "relative_gap", "iterations", "sandwich"]);
    let mut timing_head = head.to_vec();
    timing_head.extend(["construct_s", "solve_s", "multistart_s"]);
    io::write_atomic(&a.out, io::csv_string(&main_head, &table)?.as_bytes())?;
    io::write_atomic(&timing_path(&a.out), io::csv_string(&timing_head, &timing)?.as_bytes())?;

    let failures = rows.iter().filter(|r| !r.sandwich_ok()).count();
    for arch in a.arch.grid() {
        let gaps: Vec<f64> = rows.iter().filter(|r| r.arch == arch).map(|r| r.gap).collect();
        let mean = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
        println!(
            "L={} W={} I={} N={}: {} instances, mean relative gap {:.4}%",
            arch.layers,
            arch.width,
            arch.inputs,
            arch.degree,
            gaps.len(),
            mean
        );
    }
    println!("{} rows written to {}, {} failing", rows.len(), a.out.display(), failures);
    Ok(if failures == 0 { EXIT_OK } else { EXIT_NUMERIC })
}

/// `<out>.timing.csv` next to the result table.
pub fn timing_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".timing.csv");
    out.with_file_name(name)
}

fn cmd_gam(a: &GamCheckArgs) -> Result<i32> {
    positive("--tol", a.tol)?;
    let g = Mpgam::from_json(&read_input(&a.model)?)?;
    let (relax, argmin) = gam_relaxation_min(&g, a.tol)?;
    let (grid, _) = gam_grid_min(&g, GAM_GRID_POINTS)?;
    let diff = relax - grid;
    let pass = diff.abs() <= GAM_CHECK_TOL * (1.0 + grid.abs());
    println!("relaxation min  {}", format_f64(relax));
    println!("grid-oracle min {}", format_f64(grid));
    println!("difference      {}", format_f64(diff));
    println!(
        "argmin          [{}]",
        argmin.iter().map(|&x| format_f64(x)).collect::<Vec<_>>().join(", ")
    );
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { EXIT_OK } else { EXIT_NUMERIC })
}
