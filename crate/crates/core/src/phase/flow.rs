use std::cell::RefCell;
use std::sync::Arc;

use ode_solvers::{DVector, Dop853, OutputType, System};

use num_complex::Complex64 as C64;

use super::field::ObservableField;
use super::point::{PhasePoint, SpinBlock};
use super::{flat_gradient, BracketBackend, Convention, PoissonStructure};
use crate::error::{Error, Result};

/// Integration settings for [`hamiltonian_flow`].
#[derive(Clone)]
pub struct FlowOptions {
    /// Local absolute and relative error target per step.
    pub tol: f64,
    /// Spacing of the returned samples; the end time is always sampled.
    pub sample_dt: f64,
    pub max_steps: usize,
    pub backend: BracketBackend,
    /// Distance to the singular set; the flow aborts once it drops below
    /// `guard_min`.
    pub guard: Option<Arc<dyn Fn(&PhasePoint) -> f64 + Send + Sync>>,
    pub guard_min: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            tol: 1e-10,
            sample_dt: 0.5,
            max_steps: 1_000_000,
            backend: BracketBackend::CanonicalOnly,
            guard: None,
            guard_min: 0.0,
        }
    }
}

impl std::fmt::Debug for FlowOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlowOptions")
            .field("tol", &self.tol)
            .field("sample_dt", &self.sample_dt)
            .field("max_steps", &self.max_steps)
            .field("backend", &self.backend)
            .field("guard_min", &self.guard_min)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub accepted: usize,
    pub rejected: usize,
    /// Set when integration stopped early; the samples up to that point are kept.
    pub aborted: Option<Error>,
}

impl Trajectory {
    pub fn last(&self) -> &PhasePoint {
        self.points.last().expect("trajectory has at least the initial point")
    }
}

fn to_flat(x: &PhasePoint, backend: BracketBackend) -> Vec<f64> {
    let mut y: Vec<f64> = x.q().iter().chain(x.p()).copied().collect();
    if let Some(s) = x.spin() {
        match backend {
            BracketBackend::CanonicalOnly => {}
            BracketBackend::CanonicalPlusXiEta => {
                y.extend_from_slice(s.xi_flat());
                y.extend_from_slice(s.eta_flat());
            }
            BracketBackend::CanonicalPlusKirillovF => y.extend_from_slice(s.f_flat()),
        }
    }
    y
}

fn from_flat(template: &PhasePoint, y: &[f64], backend: BracketBackend) -> Result<PhasePoint> {
    let n = template.n();
    let mut x = template.clone();
    x.set_q(y[..n].to_vec());
    x.set_p(y[n..2 * n].to_vec());
    if let Some(s) = template.spin() {
        let rest = &y[2 * n..];
        match backend {
            BracketBackend::CanonicalOnly => {}
            BracketBackend::CanonicalPlusXiEta => {
                let m = n * s.rank();
                x.set_spin(Some(SpinBlock::new(n, s.rank(), rest[..m].to_vec(), rest[m..2 * m].to_vec())?));
            }
            BracketBackend::CanonicalPlusKirillovF => x.set_spin(Some(s.with_f(rest.to_vec()))),
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Dimension("non-finite state".into()));
    }
    Ok(x)
}

/// `ẏ = Π ∇H` with `q̇ = ∂H/∂p`, `ṗ = −∂H/∂q`; the spin chart follows the
/// same orientation.
fn vector_field(h: &ObservableField<C64>, x: &PhasePoint, backend: BracketBackend) -> Result<Vec<f64>> {
    let ps = PoissonStructure::new(x, backend, Convention::Reversed)?;
    let grad = flat_gradient(&h.partials_for(x, backend)?, x, backend)?;
    let mut out = vec![0.0; ps.dim];
    for &(a, b, c) in &ps.triples {
        out[a] += c * grad[b].re;
    }
    Ok(out)
}

/// ODE system handed to the stepper. Evaluation errors cannot propagate
/// through the stepper, so the first one is stored and ends the run at the
/// next accepted step.
struct FlowSystem<'a> {
    h: &'a ObservableField<C64>,
    template: &'a PhasePoint,
    backend: BracketBackend,
    dir: f64,
    guard: Option<&'a (dyn Fn(&PhasePoint) -> f64 + Send + Sync)>,
    guard_min: f64,
    failure: RefCell<Option<Error>>,
    /// Last accepted state that passed the guard.
    good: (f64, Vec<f64>),
    stop: Option<String>,
    accepted: usize,
    /// The two most recent accepted step sizes.
    steps: [f64; 2],
}

impl System<f64, DVector<f64>> for &mut FlowSystem<'_> {
    fn system(&self, _t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let field = from_flat(self.template, y.as_slice(), self.backend)
            .and_then(|x| vector_field(self.h, &x, self.backend));
        match field {
            Ok(v) => {
                for (d, v) in dy.iter_mut().zip(v) {
                    *d = self.dir * v;
                }
            }
            Err(e) => {
                dy.fill(0.0);
                self.failure.borrow_mut().get_or_insert(e);
            }
        }
    }

    fn solout(&mut self, t: f64, y: &DVector<f64>, _dy: &DVector<f64>) -> bool {
        self.accepted += 1;
        self.steps = [self.steps[1], t - self.good.0];
        if let Some(e) = self.failure.borrow().as_ref() {
            self.stop = Some(format!("stage evaluation failed: {e}"));
            return true;
        }
        if let Some(g) = self.guard {
            let Ok(x) = from_flat(self.template, y.as_slice(), self.backend) else {
                self.stop = Some("non-finite state".into());
                return true;
            };
            let d = g(&x);
            self.good = (t, y.as_slice().to_vec());
            if d < self.guard_min {
                self.stop = Some(format!(
                    "distance to the singular set {d:.3e} fell below {:.3e}",
                    self.guard_min
                ));
                return true;
            }
            return false;
        }
        self.good = (t, y.as_slice().to_vec());
        false
    }
}

/// Integrate the Hamiltonian flow of `h` from `x0` over time `t_end`
/// (negative for backward flow) with the Dormand–Prince 8(5,3) method.
/// Samples are returned at multiples of `sample_dt` and at `t_end`; each
/// sample interval is integrated exactly to its end point.
pub fn hamiltonian_flow(
    h: &ObservableField<C64>,
    x0: &PhasePoint,
    t_end: f64,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    if !(opts.tol > 0.0) || !(opts.sample_dt > 0.0) || !t_end.is_finite() {
        return Err(Error::Config(format!(
            "flow needs tol > 0, sample_dt > 0 and a finite end time (got {}, {}, {t_end})",
            opts.tol, opts.sample_dt
        )));
    }
    if opts.backend.needs_spin() && x0.spin().is_none() {
        return Err(Error::MissingSpin { backend: opts.backend });
    }
    // Evaluate once so that a bad starting point is an error, not an abort.
    vector_field(h, x0, opts.backend)?;
    let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
    let span = t_end.abs();
    let mut traj = Trajectory {
        times: vec![0.0],
        points: vec![x0.clone()],
        accepted: 0,
        rejected: 0,
        aborted: None,
    };
    let mut y = to_flat(x0, opts.backend);
    let mut t = 0.0;
    let mut step: f64 = 0.0;
    while t < span {
        let mut next = (t + opts.sample_dt).min(span);
        if span - next <= 1e-12 * span.max(1.0) {
            next = span;
        }
        let used = traj.accepted + traj.rejected;
        let mut sys = FlowSystem {
            h,
            template: x0,
            backend: opts.backend,
            dir,
            guard: opts.guard.as_deref(),
            guard_min: opts.guard_min,
            failure: RefCell::new(None),
            good: (t, y.clone()),
            stop: None,
            accepted: 0,
            steps: [0.0; 2],
        };
        let y_start = DVector::from_vec(y.clone());
        let seg = next - t;
        let mut stepper = Dop853::from_param(
            &mut sys,
            t,
            next,
            seg,
            y_start,
            opts.tol,
            opts.tol,
            0.9,
            0.0,
            1.0 / 3.0,
            6.0,
            seg,
            step.min(seg),
            opts.max_steps.saturating_sub(used).min(u32::MAX as usize) as u32,
            u32::MAX,
            OutputType::Sparse,
        );
        let res = stepper.integrate();
        drop(stepper);
        traj.accepted += sys.accepted;
        if let Ok(stats) = &res {
            traj.rejected += stats.rejected_steps as usize;
        }
        let (t_good, y_good) = std::mem::take(&mut sys.good);
        let reason = match res {
            Err(e) => Some(e.to_string()),
            Ok(_) => sys.stop.take(),
        };
        if let Some(reason) = reason {
            if t_good > t {
                traj.times.push(dir * t_good);
                traj.points.push(from_flat(x0, &y_good, opts.backend)?);
            }
            traj.aborted = Some(Error::Integration { t: dir * t_good, reason });
            return Ok(traj);
        }
        step = sys.steps[0].max(sys.steps[1]);
        y = y_good;
        t = next;
        traj.times.push(dir * t);
        traj.points.push(from_flat(x0, &y, opts.backend)?);
    }
    Ok(traj)
}
