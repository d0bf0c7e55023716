use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{spin::antisymmetric_spin, Model, ModelSpec};
use crate::error::{Error, Result};
use crate::phase::{BracketBackend, PhasePoint, SpinBlock};
use crate::specfun::{rs_branch_warning, FunctionFamily};

/// Sampling box for random phase points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSettings {
    /// Minimum separation between particles (and from the walls for SU(n,n)).
    pub delta_sep: f64,
    /// Extra random width added to each gap.
    pub gap_width: f64,
    /// Momenta are drawn from `[−p_range, p_range]`.
    pub p_range: f64,
    /// Spin entries are drawn from `[−spin_range, spin_range]`.
    pub spin_range: f64,
    /// Redraws allowed when a point lands on a branch cut.
    pub max_tries: usize,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        SamplerSettings {
            delta_sep: 0.3,
            gap_width: 0.5,
            p_range: 1.0,
            spin_range: 1.0,
            max_tries: 64,
        }
    }
}

impl SamplerSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.delta_sep > 0.0 && self.gap_width >= 0.0 && self.p_range >= 0.0 && self.spin_range >= 0.0;
        if !ok || self.max_tries == 0 {
            return Err(Error::Config(format!("invalid sampler settings: {self:?}")));
        }
        Ok(())
    }
}

fn uniform(rng: &mut impl Rng, half: f64) -> f64 {
    if half == 0.0 {
        0.0
    } else {
        rng.random_range(-half..=half)
    }
}

/// Cumulative gaps `δ + u·w`, `u ∈ [0, 1)`, starting at `start`.
fn gaps(rng: &mut impl Rng, n: usize, start: f64, delta: f64, width: f64) -> Vec<f64> {
    let mut q = Vec::with_capacity(n);
    let mut cur = start;
    for k in 0..n {
        if k > 0 {
            cur += delta + width * rng.random::<f64>();
        }
        q.push(cur);
    }
    q
}

fn centered(mut q: Vec<f64>) -> Vec<f64> {
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    q.iter_mut().for_each(|v| *v -= mean);
    q
}

fn positions(model: &Model, rng: &mut impl Rng, s: &SamplerSettings) -> Vec<f64> {
    let n = model.n();
    match model.spec() {
        ModelSpec::CmTrigSunn { .. } => gaps(rng, n, s.delta_sep, s.delta_sep, s.gap_width),
        _ => match model.family() {
            Some(FunctionFamily::Elliptic(p)) => {
                // keep every difference inside (δ, 2ω₁ − δ) along the real period
                let period = 2.0 * p.omega1().re;
                let delta = s.delta_sep.min(period / (n as f64 + 1.0));
                let width = if n > 1 {
                    ((period - delta) / (n as f64 - 1.0) - delta).max(0.0).min(s.gap_width)
                } else {
                    0.0
                };
                centered(gaps(rng, n, 0.0, delta, width))
            }
            _ => centered(gaps(rng, n, 0.0, s.delta_sep, s.gap_width)),
        },
    }
}

fn spin_block(model: &Model, rng: &mut impl Rng, s: &SamplerSettings, backend: BracketBackend) -> Result<Option<SpinBlock>> {
    let ModelSpec::CmSpin { n, r, .. } = model.spec() else {
        return Ok(None);
    };
    let (n, r) = (*n, *r);
    let xi: Vec<f64> = (0..n * r).map(|_| uniform(rng, s.spin_range)).collect();
    let block = match backend {
        BracketBackend::CanonicalPlusXiEta => {
            let eta = (0..n * r).map(|_| uniform(rng, s.spin_range)).collect();
            SpinBlock::new(n, r, xi, eta)?
        }
        _ => antisymmetric_spin(n, r, xi)?,
    };
    Ok(Some(block))
}

pub(crate) fn sample(model: &Model, rng: &mut impl Rng, s: &SamplerSettings, backend: BracketBackend) -> Result<PhasePoint> {
    s.validate()?;
    for _ in 0..s.max_tries {
        // Weyl chamber ordering q₁ > q₂ > … > q_N
        let mut q = positions(model, rng, s);
        q.reverse();
        let p: Vec<f64> = (0..model.n()).map(|_| uniform(rng, s.p_range)).collect();
        let spin = spin_block(model, rng, s, backend)?;
        if let ModelSpec::Rs { family, coupling, .. } = model.spec() {
            let mut cut = false;
            for i in 0..q.len() {
                for j in 0..q.len() {
                    if i != j && rs_branch_warning(C64::new(q[i] - q[j], 0.0), family, coupling) {
                        cut = true;
                    }
                }
            }
            if cut {
                continue;
            }
        }
        return PhasePoint::with_spin(q, p, spin);
    }
    Err(Error::model(
        model.id().as_str(),
        format!("no admissible point after {} draws", s.max_tries),
    ))
}
