//! Command-line driver: `verify`, `scan`, `evolve` and `eval`.
//!
//! Exit codes: 0 when every gated check passes, 2 when one fails (or an
//! evaluation hits a domain error), 1 on configuration errors.

mod commands;
mod config;
mod report;
mod suite;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{eval_function, evolve, scan, verify, EvolveOutcome};
pub use config::{size_cap, EvolveSettings, InitialPoint, RunConfig, SpectralArgs, DEFAULT_MAX_N, MAX_N_ENV};
pub use report::{aggregate, sort_checks, AggregateRow, RunReport, Summary, Timing, VERSION};
pub use suite::{checks_for, default_suite, run_job, sample_point, scan_checks_for, CheckKind, Job, RNG_NAME};

use crate::error::{Error, Result};
use crate::models::ModelId;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "laxkit", author, version, about = "Numerical checks of Lax pairs and r-matrix structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run check suites over the configured models, sizes and seeds.
    Verify(CommonArgs),
    /// Sweep models, sizes and seeds and aggregate the worst residuals.
    Scan(ScanArgs),
    /// Integrate the Hamiltonian flow and write the trajectory as TSV.
    Evolve(EvolveArgs),
    /// Evaluate a special function.
    Eval(EvalArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model ids, comma separated.
    #[arg(long, value_delimiter = ',')]
    model: Vec<String>,
    /// Sizes: `3`, `2,3` or the inclusive range `2..4`.
    #[arg(long)]
    n: Option<String>,
    /// Seeds, comma separated.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// Check names, comma separated.
    #[arg(long, value_delimiter = ',')]
    check: Vec<String>,
    /// Tolerance applied to every check.
    #[arg(long)]
    tol: Option<f64>,
    /// Spinless coupling as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    coupling: Option<String>,
    /// Hyperbolic scale.
    #[arg(long)]
    nu: Option<f64>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Leave wall-clock data out of the report.
    #[arg(long)]
    deterministic_report: bool,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Use seeds `0..count`.
    #[arg(long)]
    seed_count: Option<u64>,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    t_end: Option<f64>,
    /// Sampling interval of the trajectory.
    #[arg(long)]
    dt: Option<f64>,
    /// Integrator tolerance.
    #[arg(long)]
    integrator_tol: Option<f64>,
    /// Integrate back to `t = 0` after reaching the end time.
    #[arg(long)]
    reverse: bool,
    /// Trajectory TSV path; standard output when absent.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvalFn {
    Sigma,
    Zeta,
    Wp,
    Phi,
    L,
    F,
    #[value(name = "C")]
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum)]
pub enum FamilyKind {
    Rational,
    Hyperbolic,
    #[default]
    Elliptic,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct EvalArgs {
    /// Function name.
    function: EvalFn,
    /// Arguments as `re` or `re,im`: `x` then an optional spectral argument.
    #[arg(num_args = 0..=2, allow_negative_numbers = true)]
    args: Vec<String>,
    /// `x`, for values such as `-0.3,-0.2` that read as flags.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "args")]
    x: Option<String>,
    /// Spectral argument, used with `--x`.
    #[arg(long, allow_hyphen_values = true, requires = "x")]
    lambda: Option<String>,
    #[arg(long, value_enum, default_value_t = FamilyKind::Elliptic)]
    family: FamilyKind,
    /// JSON run configuration supplying the family parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nu: Option<f64>,
}

/// Parse `2..4` (inclusive), `2,3,4` or `3`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("invalid size list '{s}'; use 3, 2,3 or 2..4"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

/// Parse `re` or `re,im` (brackets allowed).
pub fn parse_complex(s: &str) -> Result<[f64; 2]> {
    let bad = || Error::Config(format!("invalid complex number '{s}'; use re or re,im"));
    let t = s.trim().trim_start_matches('[').trim_end_matches(']');
    let parts: Vec<&str> = t.split(',').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(bad()),
    }
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if !self.model.is_empty() {
            c.model = self.model.iter().map(|m| m.trim().parse::<ModelId>()).collect::<Result<_>>()?;
        }
        if let Some(n) = &self.n {
            c.n = parse_sizes(n)?;
        }
        if !self.seed.is_empty() {
            c.seeds = self.seed.clone();
        }
        if !self.check.is_empty() {
            c.checks = self.check.iter().map(|s| s.trim().to_string()).collect();
        }
        if let Some(t) = self.tol {
            c.tol = Some(t);
        }
        if let Some(z) = &self.coupling {
            c.params.coupling = Some(parse_complex(z)?);
        }
        if let Some(nu) = self.nu {
            c.params.nu = nu;
        }
        if let Some(p) = &self.report {
            c.report = Some(p.clone());
        }
        if self.deterministic_report {
            c.deterministic_report = true;
        }
        Ok(c)
    }
}

fn config_error(e: &Error) -> i32 {
    eprintln!("laxkit: {e}");
    EXIT_CONFIG
}

/// Entry point of the `laxkit` binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Verify(a) => match a.load() {
            Ok(c) => commands::finish(verify(&c)),
            Err(e) => config_error(&e),
        },
        Command::Scan(a) => {
            let loaded = a.common.load().map(|mut c| {
                if let Some(k) = a.seed_count {
                    c.seeds = (0..k).collect();
                }
                c
            });
            match loaded {
                Ok(c) => commands::finish(scan(&c)),
                Err(e) => config_error(&e),
            }
        }
        Command::Evolve(a) => {
            let loaded = a.common.load().map(|mut c| {
                let e = &mut c.evolve;
                if let Some(t) = a.t_end {
                    e.t_end = t;
                }
                if let Some(dt) = a.dt {
                    e.sample_dt = dt;
                }
                if let Some(t) = a.integrator_tol {
                    e.tol = t;
                }
                if a.reverse {
                    e.reverse = true;
                }
                if let Some(p) = &a.trajectory {
                    e.trajectory = Some(p.clone());
                }
                c
            });
            match loaded {
                Ok(c) => commands::run_evolve(&c),
                Err(e) => config_error(&e),
            }
        }
        Command::Eval(a) => {
            let args: Vec<String> = match &a.x {
                Some(x) => std::iter::once(x.clone()).chain(a.lambda.clone()).collect(),
                None => a.args.clone(),
            };
            commands::run_eval(a.function, &args, a.family, a.config.as_deref(), a.nu)
        }
    }
}
