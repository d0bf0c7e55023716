use std::fmt::Write as _;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64 as C64;
use clap::ValueEnum;
use rayon::prelude::*;

use super::config::RunConfig;
use super::report::{RunReport, Timing};
use super::suite::{checks_for, gate_flow_rows, run_job, sample_point, scan_checks_for, CheckKind, Job};
use super::{parse_complex, EvalFn, FamilyKind, EXIT_FAIL, EXIT_OK};
use crate::error::{Error, Result};
use crate::models::{c_factor, Model, ModelId, ModelParams, ModelSpec};
use crate::specfun::{rs_f, FunctionFamily, Spectral};
use crate::verify::{check_isospectral, CheckReport, IsospectralOptions, IsospectralOutcome};

struct Clock {
    started: SystemTime,
    t0: Instant,
}

impl Clock {
    fn start() -> Self {
        Clock {
            started: SystemTime::now(),
            t0: Instant::now(),
        }
    }

    fn timing(&self) -> Timing {
        Timing {
            started_unix_s: self.started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            wall_time_s: self.t0.elapsed().as_secs_f64(),
        }
    }
}

fn run_jobs(jobs: &[Job], config: &RunConfig) -> Vec<CheckReport> {
    jobs.par_iter().flat_map_iter(|j| run_job(j, config)).collect()
}

fn build_jobs(config: &RunConfig, select: impl Fn(&RunConfig, ModelId) -> Result<Vec<CheckKind>>) -> Result<Vec<Job>> {
    config.validate()?;
    let mut jobs = Vec::new();
    for &model in &config.model {
        let checks = select(config, model)?;
        if checks.is_empty() {
            continue;
        }
        for &n in &config.n {
            for (i, &seed) in config.seeds.iter().enumerate() {
                jobs.push(Job {
                    model,
                    n,
                    seed,
                    first_seed: i == 0,
                    checks: checks.clone(),
                });
            }
        }
    }
    Ok(jobs)
}

/// Run the requested (or default) checks. `Err` is a configuration error.
pub fn verify(config: &RunConfig) -> Result<RunReport> {
    let clock = Clock::start();
    let jobs = build_jobs(config, checks_for)?;
    let checks = run_jobs(&jobs, config);
    Ok(RunReport::new("verify", config, checks, Some(clock.timing())))
}

/// Sweep `(model, n, seed)`; models skip checks they do not support.
pub fn scan(config: &RunConfig) -> Result<RunReport> {
    let clock = Clock::start();
    let jobs = build_jobs(config, scan_checks_for)?;
    if jobs.is_empty() {
        return Err(Error::Config("no requested check applies to the selected models".into()));
    }
    let checks = run_jobs(&jobs, config);
    Ok(RunReport::new("scan", config, checks, Some(clock.timing())).with_aggregate())
}

/// Emit a report and map it to an exit code.
pub(super) fn finish(result: Result<RunReport>) -> i32 {
    let report = match result {
        Ok(r) => r,
        Err(e) => return super::config_error(&e),
    };
    if let Err(e) = report.emit(report.config.report.as_deref()) {
        return super::config_error(&e);
    }
    eprint!("{}", report.human());
    exit_code(&report)
}

fn exit_code(report: &RunReport) -> i32 {
    if report.summary.blocking == 0 {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

pub struct EvolveOutcome {
    pub report: RunReport,
    /// Trajectory table, header line first.
    pub table: String,
    pub aborted: Option<String>,
}

fn sorted_eigenvalues(ev: &[C64]) -> Vec<C64> {
    let mut v = ev.to_vec();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

/// TSV with columns `t`, `q_i`, `p_i`, eigenvalues of `L(λ)` (sorted by real
/// part, split into re/im) and `Tr L^k` for `k = 1..4`.
pub fn trajectory_table(out: &IsospectralOutcome) -> String {
    let traj = &out.trajectory;
    let n = traj.points.first().map(|x| x.n()).unwrap_or(0);
    let size = out.eigenvalues.first().map(|e| e.len()).unwrap_or(0);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("q{i}")));
    header.extend((1..=n).map(|i| format!("p{i}")));
    for i in 1..=size {
        header.push(format!("ev{i}_re"));
        header.push(format!("ev{i}_im"));
    }
    for k in 1..=4 {
        header.push(format!("tr{k}_re"));
        header.push(format!("tr{k}_im"));
    }
    let mut s = header.join("\t");
    s.push('\n');
    for (idx, x) in traj.points.iter().enumerate() {
        let mut row = vec![traj.times[idx]];
        row.extend_from_slice(x.q());
        row.extend_from_slice(x.p());
        for z in sorted_eigenvalues(&out.eigenvalues[idx]) {
            row.extend([z.re, z.im]);
        }
        for z in out.traces[idx] {
            row.extend([z.re, z.im]);
        }
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "{}", cells.join("\t"));
    }
    s
}

/// Integrate one model from an explicit or sampled initial point.
/// `Err` is a configuration error; failures of the flow are in the report.
pub fn evolve(config: &RunConfig) -> Result<EvolveOutcome> {
    let clock = Clock::start();
    config.validate()?;
    if config.model.len() != 1 || config.n.len() != 1 {
        return Err(Error::Config("evolve takes exactly one model and one size".into()));
    }
    if !config.checks.is_empty() {
        return Err(Error::Config("evolve runs the isospectral check only; drop the check list".into()));
    }
    let (id, n, seed) = (config.model[0], config.n[0], config.seeds[0]);
    let model = Model::from_id(id, n, &config.params)?;
    let x0 = match &config.evolve.initial {
        Some(init) => {
            if init.q.len() != n {
                return Err(Error::Config(format!(
                    "initial point has {} particles, the model has {n}",
                    init.q.len()
                )));
            }
            let x = init.point(config.params.rank)?;
            model.lax(&x, Spectral::Finite(config.spectral.lambda()))?;
            x
        }
        None => sample_point(&model, seed, config, model.backend())?,
    };
    let ev = &config.evolve;
    let opts = IsospectralOptions {
        t_end: ev.t_end,
        integrator_tol: ev.tol,
        sample_dt: ev.sample_dt,
        lambda: config.spectral.lambda(),
        drift_tol: config.tol_for(CheckKind::Isospectral),
        energy_tol: config.tol_for(CheckKind::Energy),
        guard_min: config.sampler.delta_sep / 10.0,
        round_trip: ev.reverse,
        ..IsospectralOptions::default()
    };
    let seeded = |r: CheckReport| if ev.initial.is_some() { r } else { r.with_seed(seed) };
    match check_isospectral(&model, &x0, &opts) {
        Ok(out) => {
            let table = trajectory_table(&out);
            let aborted = out.trajectory.aborted.as_ref().map(|e| e.to_string());
            let (s, e) = gate_flow_rows(id, &config.params, seeded(out.spectrum), seeded(out.energy));
            let report = RunReport::new("evolve", config, vec![s, e], Some(clock.timing()));
            Ok(EvolveOutcome { report, table, aborted })
        }
        Err(err) => {
            let s = CheckReport::failure("isospectral", id.as_str(), n, opts.drift_tol, &err);
            let e = CheckReport::failure("energy", id.as_str(), n, opts.energy_tol, &err);
            let report = RunReport::new("evolve", config, vec![seeded(s), seeded(e)], Some(clock.timing()));
            Ok(EvolveOutcome {
                report,
                table: String::new(),
                aborted: Some(err.to_string()),
            })
        }
    }
}

pub(super) fn run_evolve(config: &RunConfig) -> i32 {
    let out = match evolve(config) {
        Ok(o) => o,
        Err(e) => return super::config_error(&e),
    };
    // The table goes to stdout unless a path is given; the report then
    // needs its own path or it takes stdout.
    let write = |path: &Path, text: &str| {
        std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
    };
    let result = match (&config.evolve.trajectory, &config.report) {
        (Some(t), r) => write(t, &out.table).and_then(|_| out.report.emit(r.as_deref())),
        (None, Some(r)) => {
            print!("{}", out.table);
            write(r, &out.report.to_json())
        }
        (None, None) => {
            print!("{}", out.table);
            Ok(())
        }
    };
    if let Err(e) = result {
        return super::config_error(&e);
    }
    if let Some(reason) = &out.aborted {
        eprintln!("laxkit: {reason}");
    }
    eprint!("{}", out.report.human());
    exit_code(&out.report)
}

/// Family selected for `eval`.
pub fn eval_family(kind: FamilyKind, params: &ModelParams) -> Result<FunctionFamily> {
    Ok(match kind {
        FamilyKind::Rational => FunctionFamily::Rational,
        FamilyKind::Hyperbolic => FunctionFamily::hyperbolic(params.nu)?,
        FamilyKind::Elliptic => FunctionFamily::Elliptic(params.elliptic()?),
    })
}

/// Evaluate a special function. `args` is `x` and an optional spectral
/// argument. Degenerate families use their limits: `σ = x`, `ζ = 1/x`,
/// `℘ = 1/x²` (rational) and `σ = sinh(νx/2)/(ν/2)` with the matching
/// `coth` and `sinh⁻²` kernels (hyperbolic).
pub fn eval_function(f: EvalFn, args: &[C64], kind: FamilyKind, params: &ModelParams) -> Result<C64> {
    let family = eval_family(kind, params)?;
    let x = args[0];
    let spectral = args.get(1).map(|&l| Spectral::Finite(l)).unwrap_or(Spectral::Infinite);
    let rs_coupling = || {
        let id = match kind {
            FamilyKind::Rational => ModelId::RsRational,
            FamilyKind::Hyperbolic => ModelId::RsHyperbolic,
            FamilyKind::Elliptic => ModelId::RsElliptic,
        };
        match Model::from_id(id, 2, params)?.spec() {
            ModelSpec::Rs { coupling, .. } => Ok(coupling.clone()),
            _ => unreachable!("RS id builds an RS model"),
        }
    };
    match f {
        EvalFn::Sigma => match &family {
            FunctionFamily::Rational => Ok(x),
            FunctionFamily::Hyperbolic { nu } => Ok((0.5 * nu * x).sinh() / (0.5 * nu)),
            FunctionFamily::Elliptic(p) => p.sigma(x),
        },
        EvalFn::Zeta => family.coth(x),
        EvalFn::Wp => family.v(x),
        EvalFn::Phi => family.phi(x, spectral),
        EvalFn::L => family.l(x, spectral.finite()),
        EvalFn::F => rs_f(x, &family, &rs_coupling()?),
        EvalFn::C => c_factor(x, &family, &rs_coupling()?, spectral),
    }
}

/// `re im`, 17 significant digits each.
pub fn format_complex(z: C64) -> String {
    format!("{:.16e} {:.16e}", z.re, z.im)
}

pub(super) fn run_eval(f: EvalFn, raw: &[String], kind: FamilyKind, config: Option<&Path>, nu: Option<f64>) -> i32 {
    let setup = (|| {
        let mut params = match config {
            Some(p) => RunConfig::from_file(p)?.params,
            None => ModelParams::default(),
        };
        if let Some(nu) = nu {
            params.nu = nu;
        }
        let args: Vec<C64> = raw
            .iter()
            .map(|s| parse_complex(s).map(|[re, im]| C64::new(re, im)))
            .collect::<Result<_>>()?;
        let needs = match f {
            EvalFn::Sigma | EvalFn::Zeta | EvalFn::Wp | EvalFn::F => 1..=1,
            EvalFn::Phi | EvalFn::L | EvalFn::C => 1..=2,
        };
        if !needs.contains(&args.len()) {
            return Err(Error::Config(format!(
                "{} takes {} argument(s), got {}",
                f.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default(),
                if needs.end() == &1 { "1" } else { "1 or 2" },
                args.len()
            )));
        }
        Ok((params, args))
    })();
    let (params, args) = match setup {
        Ok(v) => v,
        Err(e) => return super::config_error(&e),
    };
    match eval_function(f, &args, kind, &params) {
        Ok(z) => {
            println!("{}", format_complex(z));
            EXIT_OK
        }
        Err(e @ Error::InvalidParams(_)) => super::config_error(&e),
        Err(e) => {
            eprintln!("laxkit: {e}");
            EXIT_FAIL
        }
    }
}
