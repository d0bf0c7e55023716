use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::{CheckReport, Measured, DEFAULT_LAMBDA};
use crate::error::Result;
use crate::models::Model;
use crate::phase::{
    flat_gradient, hamiltonian_flow, BracketBackend, Convention, FlowOptions, ObservableField, PhasePoint,
    PoissonStructure, Trajectory,
};
use crate::specfun::Spectral;
use crate::tensor::{eigvals, spectrum_distance};

/// `({F, G}, Σ |individual terms|)`.
fn bracket_with_scale(
    f: &ObservableField<C64>,
    g: &ObservableField<C64>,
    x: &PhasePoint,
    backend: BracketBackend,
    conv: Convention,
) -> Result<(C64, f64)> {
    let ps = PoissonStructure::new(x, backend, conv)?;
    let ga = flat_gradient(&f.partials_for(x, backend)?, x, backend)?;
    let gb = flat_gradient(&g.partials_for(x, backend)?, x, backend)?;
    let terms = ps.contract(&ga, &gb, |c, a, b| Some(c * a * b));
    Ok((terms.iter().sum(), terms.iter().map(|t| t.norm()).sum()))
}

/// `|{Tr L(λ)^m, Tr L(μ)^k}|`, normalized by the sum of the magnitudes of
/// the individual bracket terms.
pub fn check_involution(
    model: &Model,
    x: &PhasePoint,
    orders: (u32, u32),
    lambda: C64,
    mu: C64,
    backend: BracketBackend,
    tol: f64,
) -> CheckReport {
    let out = (|| {
        let f = model.lax_field(Spectral::Finite(lambda)).trace_power(orders.0);
        let g = model.lax_field(Spectral::Finite(mu)).trace_power(orders.1);
        let (v, scale) = bracket_with_scale(&f, &g, x, backend, model.convention())?;
        Ok(Measured::new(v.norm(), scale).note(format!("orders=({}, {})", orders.0, orders.1)))
    })();
    CheckReport::from_result("involution", model.id().as_str(), model.n(), tol, out)
}

/// `|{H, Tr L(λ)^k}|`, normalized as in [`check_involution`].
pub fn check_hamiltonian_involution(
    model: &Model,
    x: &PhasePoint,
    k: u32,
    lambda: C64,
    backend: BracketBackend,
    tol: f64,
) -> CheckReport {
    let out = (|| {
        let g = model.lax_field(Spectral::Finite(lambda)).trace_power(k);
        let (v, scale) = bracket_with_scale(&model.hamiltonian(), &g, x, backend, model.convention())?;
        Ok(Measured::new(v.norm(), scale).note(format!("order={k}")))
    })();
    CheckReport::from_result("hamiltonian-involution", model.id().as_str(), model.n(), tol, out)
}

#[derive(Clone, Debug)]
pub struct IsospectralOptions {
    pub t_end: f64,
    pub integrator_tol: f64,
    pub sample_dt: f64,
    pub lambda: C64,
    pub drift_tol: f64,
    pub energy_tol: f64,
    /// The flow aborts closer than this to the singular set.
    pub guard_min: f64,
    pub backend: Option<BracketBackend>,
    /// Integrate back from `t_end` to `0` after the forward leg.
    pub round_trip: bool,
}

impl Default for IsospectralOptions {
    fn default() -> Self {
        IsospectralOptions {
            t_end: 10.0,
            integrator_tol: 1e-10,
            sample_dt: 0.5,
            lambda: DEFAULT_LAMBDA,
            drift_tol: 1e-6,
            energy_tol: 1e-9,
            guard_min: 0.03,
            backend: None,
            round_trip: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IsospectralOutcome {
    /// Matched eigenvalue drift of `L(λ)`.
    pub spectrum: CheckReport,
    /// Relative drift of the Hamiltonian.
    pub energy: CheckReport,
    pub trajectory: Trajectory,
    /// Eigenvalues of `L(λ)` at each sample.
    pub eigenvalues: Vec<Vec<C64>>,
    /// `Tr Lᵏ`, `k = 1..=4`, at each sample.
    pub traces: Vec<[C64; 4]>,
}

/// Integrate the model's Hamiltonian flow and measure the drift of the
/// spectrum of `L(λ)` and of the energy.
pub fn check_isospectral(model: &Model, x0: &PhasePoint, opts: &IsospectralOptions) -> Result<IsospectralOutcome> {
    let id = model.id().as_str();
    let n = model.n();
    let backend = opts.backend.unwrap_or_else(|| model.backend());
    let guard_model = model.clone();
    let flow = FlowOptions {
        tol: opts.integrator_tol,
        sample_dt: opts.sample_dt,
        backend,
        guard: Some(Arc::new(move |x: &PhasePoint| guard_model.singular_distance(x))),
        guard_min: opts.guard_min,
        ..FlowOptions::default()
    };
    let h = model.hamiltonian();
    let mut traj = hamiltonian_flow(&h, x0, opts.t_end, &flow)?;
    if opts.round_trip && traj.aborted.is_none() {
        let back = hamiltonian_flow(&h, traj.last(), -opts.t_end, &flow)?;
        traj.times.extend(back.times.iter().skip(1).map(|t| opts.t_end + t));
        traj.points.extend(back.points.into_iter().skip(1));
        traj.accepted += back.accepted;
        traj.rejected += back.rejected;
        traj.aborted = back.aborted;
    }
    let lam = Spectral::Finite(opts.lambda);
    let mut eigenvalues = Vec::with_capacity(traj.points.len());
    let mut traces = Vec::with_capacity(traj.points.len());
    let mut energies = Vec::with_capacity(traj.points.len());
    for x in &traj.points {
        let l = model.lax(x, lam)?;
        eigenvalues.push(eigvals(&l)?);
        let mut t = [C64::new(0.0, 0.0); 4];
        let mut pow = l.clone();
        for slot in t.iter_mut() {
            *slot = pow.trace();
            pow = &pow * &l;
        }
        traces.push(t);
        energies.push(h.value(x)?);
    }
    let ev0 = &eigenvalues[0];
    let ev_scale = ev0.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let drift = eigenvalues.iter().map(|e| spectrum_distance(e, ev0)).fold(0.0, f64::max);
    let trace_drift = traces
        .iter()
        .map(|t| {
            (0..4)
                .map(|k| (t[k] - traces[0][k]).norm() / traces[0][k].norm().max(1.0))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let e0 = energies[0];
    let e_drift = energies.iter().map(|e| (e - e0).norm()).fold(0.0, f64::max);

    let mut spectrum = CheckReport::from_residual("isospectral", id, n, drift, ev_scale, opts.drift_tol)
        .note(format!("T={} tol={}", opts.t_end, opts.integrator_tol))
        .note(format!("trace drift (k<=4)={trace_drift:.3e}"))
        .note(format!("steps accepted={} rejected={}", traj.accepted, traj.rejected))
        .note(format!("backend={}", backend.name()));
    let mut energy = CheckReport::from_residual("energy", id, n, e_drift, e0.norm(), opts.energy_tol)
        .note(format!("H(0)={:.17e}", e0.re));
    if opts.round_trip && traj.aborted.is_none() {
        let (a, b) = (&traj.points[0], traj.last());
        let ret = a.q().iter().zip(b.q()).chain(a.p().iter().zip(b.p())).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        spectrum = spectrum.note(format!("round-trip return error={ret:.3e}"));
    }
    if let Some(err) = &traj.aborted {
        for r in [&mut spectrum, &mut energy] {
            r.pass = false;
            r.diagnostics.push(format!("flow aborted: {err}"));
        }
    }
    Ok(IsospectralOutcome {
        spectrum,
        energy,
        trajectory: traj,
        eigenvalues,
        traces,
    })
}
