use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::models::{r_exchange, Model, ModelId, ModelParams, ModelSpec};
use crate::phase::{BracketBackend, PhasePoint};
use crate::specfun::{FunctionFamily, Spectral};
use crate::verify::{
    check_degeneration, check_dual_form, check_dynamical_cybe, check_dynamical_cybe_with, check_hamiltonian_involution,
    check_involution, check_isospectral, check_linear_rma, check_quadratic_rs, check_sklyanin_form, check_yb2,
    CartanBasis, CheckReport, IsospectralOptions,
};

/// Name of the generator behind every sampled point.
pub const RNG_NAME: &str = "ChaCha8Rng::seed_from_u64";

/// `Im τ` used by the degeneration check.
pub const DEGENERATION_IM_TAU: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    LinearRma,
    LinearRmaXiEta,
    QuadraticRs,
    Yb2,
    Yb5,
    Involution,
    HamiltonianInvolution,
    Isospectral,
    Energy,
    DualForm,
    Sklyanin,
    Degeneration,
}

impl CheckKind {
    pub const ALL: [CheckKind; 12] = [
        CheckKind::LinearRma,
        CheckKind::LinearRmaXiEta,
        CheckKind::QuadraticRs,
        CheckKind::Yb2,
        CheckKind::Yb5,
        CheckKind::Involution,
        CheckKind::HamiltonianInvolution,
        CheckKind::Isospectral,
        CheckKind::Energy,
        CheckKind::DualForm,
        CheckKind::Sklyanin,
        CheckKind::Degeneration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::LinearRma => "linear-rma",
            CheckKind::LinearRmaXiEta => "linear-rma-xi-eta",
            CheckKind::QuadraticRs => "quadratic-rs",
            CheckKind::Yb2 => "yb2",
            CheckKind::Yb5 => "yb5",
            CheckKind::Involution => "involution",
            CheckKind::HamiltonianInvolution => "hamiltonian-involution",
            CheckKind::Isospectral => "isospectral",
            CheckKind::Energy => "energy",
            CheckKind::DualForm => "dual-form",
            CheckKind::Sklyanin => "sklyanin",
            CheckKind::Degeneration => "degeneration",
        }
    }

    pub fn default_tol(self) -> f64 {
        match self {
            CheckKind::Isospectral => 1e-6,
            CheckKind::Energy => 1e-9,
            CheckKind::Degeneration => 1e-8,
            _ => 1e-7,
        }
    }

    pub fn catalog() -> String {
        Self::ALL.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
    }

    /// Whether the check is defined for the model.
    pub fn applies_to(self, model: ModelId) -> bool {
        use ModelId::*;
        match self {
            CheckKind::LinearRma | CheckKind::Yb2 | CheckKind::Yb5 => !model.is_rs(),
            CheckKind::LinearRmaXiEta => model.is_spin(),
            CheckKind::QuadraticRs => model.is_rs(),
            CheckKind::DualForm | CheckKind::Sklyanin => matches!(model, CmSlN | CmSunn),
            CheckKind::Degeneration => matches!(model, CmElliptic | CmSpinElliptic | RsElliptic),
            CheckKind::Involution
            | CheckKind::HamiltonianInvolution
            | CheckKind::Isospectral
            | CheckKind::Energy => true,
        }
    }

    /// The relation check a scan runs when no checks are named.
    pub fn primary(model: ModelId) -> CheckKind {
        if model.is_rs() {
            CheckKind::QuadraticRs
        } else {
            CheckKind::LinearRma
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown check '{s}'; valid checks: {}", CheckKind::catalog())))
    }
}

/// Checks run by `verify` when none are named.
pub fn default_suite(model: ModelId) -> Vec<CheckKind> {
    use CheckKind::*;
    use ModelId::*;
    let mut out = match model {
        RsRational | RsHyperbolic | RsElliptic => vec![QuadraticRs],
        CmSpinRational | CmSpinHyperbolic | CmSpinElliptic => vec![LinearRma, LinearRmaXiEta, Yb2, Yb5],
        _ => vec![LinearRma, Yb2, Yb5],
    };
    out.extend([Involution, HamiltonianInvolution, Isospectral]);
    if matches!(model, CmSlN | CmSunn) {
        out.extend([DualForm, Sklyanin]);
    }
    if model == CmElliptic {
        out.push(Degeneration);
    }
    out
}

/// Requested checks for a model; an incompatible name is an error.
pub fn checks_for(config: &RunConfig, model: ModelId) -> Result<Vec<CheckKind>> {
    let kinds = config.check_kinds()?;
    if kinds.is_empty() {
        return Ok(default_suite(model));
    }
    for k in &kinds {
        if !k.applies_to(model) {
            let valid: Vec<_> = CheckKind::ALL.iter().filter(|c| c.applies_to(model)).map(|c| c.name()).collect();
            return Err(Error::Config(format!(
                "check '{k}' is not defined for {model}; valid checks for {model}: {}",
                valid.join(", ")
            )));
        }
    }
    Ok(normalized(kinds))
}

/// Checks a scan runs for a model: the named ones that apply, or the primary relation.
pub fn scan_checks_for(config: &RunConfig, model: ModelId) -> Result<Vec<CheckKind>> {
    let kinds = config.check_kinds()?;
    if kinds.is_empty() {
        return Ok(vec![CheckKind::primary(model)]);
    }
    Ok(normalized(kinds.into_iter().filter(|k| k.applies_to(model)).collect()))
}

/// `energy` rides along with `isospectral`; duplicates are dropped.
fn normalized(kinds: Vec<CheckKind>) -> Vec<CheckKind> {
    let mut out: Vec<CheckKind> = kinds
        .into_iter()
        .map(|k| if k == CheckKind::Energy { CheckKind::Isospectral } else { k })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// One unit of work.
#[derive(Clone, Debug)]
pub struct Job {
    pub model: ModelId,
    pub n: usize,
    pub seed: u64,
    /// Seed-independent checks run only on the first seed.
    pub first_seed: bool,
    pub checks: Vec<CheckKind>,
}

/// Sample a point for a model from a seed.
pub fn sample_point(model: &Model, seed: u64, config: &RunConfig, backend: BracketBackend) -> Result<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    model.sample(&mut rng, &config.sampler, backend)
}

fn spectral_free_r_family(model: &Model) -> Option<FunctionFamily> {
    match (model.id(), model.spec()) {
        (ModelId::CmRational | ModelId::CmHyperbolic, ModelSpec::CmSpinless { family, .. }) => Some(family.clone()),
        (ModelId::CmSlN, _) => Some(FunctionFamily::unit_hyperbolic()),
        _ => None,
    }
}

/// Flow rows that are reported but not gated: the spin elliptic flow can
/// pass close to the singular set, and the elliptic RS energy drift sits at
/// the integrator tolerance.
/// A spinless coupling with a non-real square makes `H` complex; the real
/// flow then follows `Re H` only, so neither row is gated.
pub fn gate_flow_rows(
    model: ModelId,
    params: &ModelParams,
    mut spectrum: CheckReport,
    mut energy: CheckReport,
) -> (CheckReport, CheckReport) {
    if let Some([re, im]) = params.coupling {
        if re * im != 0.0 && matches!(model, ModelId::CmRational | ModelId::CmHyperbolic | ModelId::CmElliptic) {
            let note = "coupling has a non-real square; H is complex and the flow follows Re H";
            spectrum = spectrum.ungated().note(note);
            energy = energy.ungated().note(note);
        }
    }
    if model == ModelId::CmSpinElliptic {
        spectrum = spectrum.ungated();
        energy = energy.ungated();
    }
    if model == ModelId::RsElliptic {
        energy = energy.ungated();
    }
    (spectrum, energy)
}

/// Worst of several reports of the same check, keeping the others' count.
fn worst(mut reports: Vec<CheckReport>, what: &str) -> CheckReport {
    let count = reports.len();
    let idx = (0..count)
        .max_by(|&a, &b| {
            let key = |r: &CheckReport| if r.residual.is_nan() { f64::INFINITY } else { r.residual };
            key(&reports[a]).total_cmp(&key(&reports[b]))
        })
        .unwrap_or(0);
    let all_pass = reports.iter().all(|r| r.pass);
    let mut r = reports.swap_remove(idx);
    r.pass = all_pass && r.pass;
    r.diagnostics.push(format!("worst of {count} {what}"));
    r
}

/// Run every check of a job. Errors while building the model or sampling
/// become failed reports.
pub fn run_job(job: &Job, config: &RunConfig) -> Vec<CheckReport> {
    let tol = |k: CheckKind| config.tol_for(k);
    let model = match Model::from_id(job.model, job.n, &config.params) {
        Ok(m) => m,
        Err(e) => {
            return job
                .checks
                .iter()
                .map(|&k| CheckReport::failure(k.name(), job.model.as_str(), job.n, tol(k), &e).with_seed(job.seed))
                .collect()
        }
    };
    let id = job.model.as_str();
    let point = sample_point(&model, job.seed, config, model.backend());
    let sp = &config.spectral;
    let (lambda, mu, nu) = (sp.lambda(), sp.mu(), sp.nu());
    let mut out = Vec::new();
    for &kind in &job.checks {
        if kind == CheckKind::Degeneration {
            if job.first_seed {
                let mut r = check_degeneration(config.params.nu, DEGENERATION_IM_TAU, tol(kind));
                r.model = id.to_string();
                out.push(r.note(format!("nu={}", config.params.nu)));
            }
            continue;
        }
        let x = match &point {
            Ok(x) => x,
            Err(e) => {
                out.push(CheckReport::failure(kind.name(), id, model.n(), tol(kind), e));
                if kind == CheckKind::Isospectral {
                    out.push(CheckReport::failure("energy", id, model.n(), tol(CheckKind::Energy), e));
                }
                continue;
            }
        };
        match kind {
            CheckKind::LinearRma => out.push(check_linear_rma(&model, x, lambda, mu, model.backend(), tol(kind))),
            CheckKind::LinearRmaXiEta => {
                let backend = BracketBackend::CanonicalPlusXiEta;
                let r = match sample_point(&model, job.seed, config, backend) {
                    Ok(y) => check_linear_rma(&model, &y, lambda, mu, backend, tol(kind)),
                    Err(e) => CheckReport::failure(kind.name(), id, model.n(), tol(kind), &e),
                };
                let mut r = r.ungated();
                r.name = kind.name().to_string();
                out.push(r);
            }
            CheckKind::QuadraticRs => out.push(check_quadratic_rs(&model, x, lambda, mu, tol(kind))),
            CheckKind::Yb2 => out.push(check_yb2(&model, x, [lambda, mu, nu], tol(kind))),
            CheckKind::Yb5 => {
                let cartan = CartanBasis::standard(&model);
                let r = match spectral_free_r_family(&model) {
                    Some(family) => {
                        let r = |y: &PhasePoint, _: Spectral, _: Spectral| r_exchange(y, &family);
                        check_dynamical_cybe_with(id, &r, x, [lambda, mu, nu], &cartan, tol(kind))
                            .note("r=exchange form")
                    }
                    None => check_dynamical_cybe(&model, x, [lambda, mu, nu], &cartan, tol(kind))
                        .note("r=model r-matrix")
                        .ungated(),
                };
                let mut r = r;
                r.name = kind.name().to_string();
                out.push(r);
            }
            CheckKind::Involution => {
                let orders = 1..=config.max_order;
                let reports = orders
                    .clone()
                    .flat_map(|m| orders.clone().filter(move |&k| k >= m).map(move |k| (m, k)))
                    .map(|o| check_involution(&model, x, o, lambda, mu, model.backend(), tol(kind)))
                    .collect();
                out.push(worst(reports, "order pairs"));
            }
            CheckKind::HamiltonianInvolution => {
                let reports = (1..=config.max_order)
                    .map(|k| check_hamiltonian_involution(&model, x, k, lambda, model.backend(), tol(kind)))
                    .collect();
                out.push(worst(reports, "orders"));
            }
            CheckKind::Isospectral | CheckKind::Energy => {
                let ev = &config.evolve;
                let opts = IsospectralOptions {
                    t_end: ev.t_end,
                    integrator_tol: ev.tol,
                    sample_dt: ev.sample_dt,
                    lambda,
                    drift_tol: tol(CheckKind::Isospectral),
                    energy_tol: tol(CheckKind::Energy),
                    guard_min: config.sampler.delta_sep / 10.0,
                    ..IsospectralOptions::default()
                };
                match check_isospectral(&model, x, &opts) {
                    Ok(o) => {
                        let (s, e) = gate_flow_rows(job.model, &config.params, o.spectrum, o.energy);
                        out.push(s);
                        out.push(e);
                    }
                    Err(err) => {
                        out.push(CheckReport::failure("isospectral", id, model.n(), opts.drift_tol, &err));
                        out.push(CheckReport::failure("energy", id, model.n(), opts.energy_tol, &err));
                    }
                }
            }
            CheckKind::DualForm => out.push(check_dual_form(&model, x, None, model.backend(), tol(kind))),
            CheckKind::Sklyanin => {
                let inf = Spectral::Infinite;
                let r = match model.r_matrix(x, inf, inf) {
                    Ok(r) => check_sklyanin_form(
                        id,
                        &model.lax_field(inf),
                        &r,
                        x,
                        model.backend(),
                        model.convention(),
                        tol(kind),
                    ),
                    Err(e) => CheckReport::failure(kind.name(), id, model.n(), tol(kind), &e),
                };
                out.push(r);
            }
            CheckKind::Degeneration => unreachable!("handled above"),
        }
    }
    for r in &mut out {
        r.seed = Some(job.seed);
        r.n = job.n;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in CheckKind::ALL {
            assert_eq!(k.name().parse::<CheckKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert!("bogus".parse::<CheckKind>().is_err());
    }

    #[test]
    fn default_suites_are_compatible() {
        for m in ModelId::ALL {
            for k in default_suite(m) {
                assert!(k.applies_to(m), "{k} on {m}");
            }
        }
    }

    #[test]
    fn rs_gets_quadratic_only_in_scan() {
        let mut c = RunConfig::default();
        c.checks = vec!["linear-rma".into(), "quadratic-rs".into()];
        assert_eq!(scan_checks_for(&c, ModelId::RsElliptic).unwrap(), vec![CheckKind::QuadraticRs]);
        assert!(checks_for(&c, ModelId::RsElliptic).is_err());
    }
}
