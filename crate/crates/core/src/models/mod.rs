//! Lax operators, Hamiltonians, r-matrices and samplers for the model catalog.

mod cm;
mod rs;
mod sample;
mod spin;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{BracketBackend, Convention, ObservableField, Partials, PhasePoint};
use crate::specfun::{EllipticParams, FunctionFamily, Spectral};
use crate::tensor::{CMatrix, TensorOperator};

pub use cm::{cm_hamiltonian_constant, ells_decomposition_gap, r_cm_sunn_displayed, r_exchange};
pub use rs::{c_factor, rs_hamiltonian, rs_quad_structure, QuadStructure, RsCoupling, RsGauge, RsParams};
pub use sample::SamplerSettings;
pub use spin::{antisymmetric_spin, spin_hamiltonian};

/// Stable catalog identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelId {
    #[serde(rename = "cm-rational")]
    CmRational,
    #[serde(rename = "cm-hyperbolic")]
    CmHyperbolic,
    #[serde(rename = "cm-elliptic")]
    CmElliptic,
    #[serde(rename = "cm-sl-n")]
    CmSlN,
    #[serde(rename = "cm-sunn")]
    CmSunn,
    #[serde(rename = "cm-spin-rational")]
    CmSpinRational,
    #[serde(rename = "cm-spin-hyperbolic")]
    CmSpinHyperbolic,
    #[serde(rename = "cm-spin-elliptic")]
    CmSpinElliptic,
    #[serde(rename = "rs-rational")]
    RsRational,
    #[serde(rename = "rs-hyperbolic")]
    RsHyperbolic,
    #[serde(rename = "rs-elliptic")]
    RsElliptic,
}

impl ModelId {
    pub const ALL: [ModelId; 11] = [
        ModelId::CmRational,
        ModelId::CmHyperbolic,
        ModelId::CmElliptic,
        ModelId::CmSlN,
        ModelId::CmSunn,
        ModelId::CmSpinRational,
        ModelId::CmSpinHyperbolic,
        ModelId::CmSpinElliptic,
        ModelId::RsRational,
        ModelId::RsHyperbolic,
        ModelId::RsElliptic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::CmRational => "cm-rational",
            ModelId::CmHyperbolic => "cm-hyperbolic",
            ModelId::CmElliptic => "cm-elliptic",
            ModelId::CmSlN => "cm-sl-n",
            ModelId::CmSunn => "cm-sunn",
            ModelId::CmSpinRational => "cm-spin-rational",
            ModelId::CmSpinHyperbolic => "cm-spin-hyperbolic",
            ModelId::CmSpinElliptic => "cm-spin-elliptic",
            ModelId::RsRational => "rs-rational",
            ModelId::RsHyperbolic => "rs-hyperbolic",
            ModelId::RsElliptic => "rs-elliptic",
        }
    }

    pub fn is_rs(self) -> bool {
        matches!(self, ModelId::RsRational | ModelId::RsHyperbolic | ModelId::RsElliptic)
    }

    pub fn is_spin(self) -> bool {
        matches!(
            self,
            ModelId::CmSpinRational | ModelId::CmSpinHyperbolic | ModelId::CmSpinElliptic
        )
    }

    pub fn catalog() -> String {
        Self::ALL.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown model '{s}'; valid models: {}", ModelId::catalog())))
    }
}

/// Parameters shared by catalog constructors. Unused fields are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Hyperbolic scale `ν`.
    pub nu: f64,
    /// Half-periods `[[re, im], [re, im]]` of the elliptic lattice.
    pub half_periods: [[f64; 2]; 2],
    /// Overall coupling `[re, im]` of the spinless Lax off-diagonal part.
    /// Unset means the repulsive unit coupling of the family: `1` for the
    /// rational and hyperbolic forms (which carry a factor `i`), `i` for the
    /// elliptic form.
    pub coupling: Option<[f64; 2]>,
    /// SU(n,n) parameter `γ`.
    pub gamma: f64,
    /// Spin rank `r`.
    pub rank: usize,
    /// RS rapidity scale `β`.
    pub beta: f64,
    /// RS mass scale `mc²`.
    pub mass_c2: f64,
    /// RS rational coupling `g`.
    pub rs_g: f64,
    /// RS hyperbolic C-factor parameter `a`.
    pub rs_a: f64,
    /// RS elliptic shift `γ`.
    pub rs_gamma: [f64; 2],
    /// RS elliptic potential scale `ν`.
    pub rs_nu: f64,
    pub rs_gauge: RsGauge,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            nu: 2.0,
            half_periods: [[1.0, 0.0], [0.0, 1.0]],
            coupling: None,
            gamma: 0.5,
            rank: 2,
            beta: 1.0,
            mass_c2: 1.0,
            rs_g: 0.6,
            rs_a: 0.7,
            rs_gamma: [0.0, 0.35],
            rs_nu: 1.0,
            rs_gauge: RsGauge::Column,
        }
    }
}

impl ModelParams {
    pub fn elliptic(&self) -> Result<EllipticParams> {
        let [a, b] = self.half_periods;
        EllipticParams::new(C64::new(a[0], a[1]), C64::new(b[0], b[1]))
    }

    pub fn coupling(&self, family: &FunctionFamily) -> C64 {
        match (self.coupling, family) {
            (Some([re, im]), _) => C64::new(re, im),
            (None, FunctionFamily::Elliptic(_)) => C64::new(0.0, 1.0),
            (None, _) => C64::new(1.0, 0.0),
        }
    }
}

/// A model definition.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    /// Spinless Calogero-Moser. Rational and hyperbolic families use the
    /// spectral-free `sl(n)` form; the elliptic family the spectral Lax.
    CmSpinless {
        family: FunctionFamily,
        n: usize,
        coupling: C64,
    },
    CmTrigSl {
        n: usize,
    },
    CmTrigSunn {
        n: usize,
        gamma: f64,
    },
    CmSpin {
        family: FunctionFamily,
        n: usize,
        r: usize,
    },
    Rs {
        family: FunctionFamily,
        n: usize,
        coupling: RsCoupling,
        gauge: RsGauge,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    id: ModelId,
    spec: ModelSpec,
}

impl Model {
    /// Catalog constructor. `n` is the particle number (`n` of SU(n,n)).
    pub fn from_id(id: ModelId, n: usize, params: &ModelParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("model size must be at least 1".into()));
        }
        let hyperbolic = || FunctionFamily::hyperbolic(params.nu);
        let elliptic = || params.elliptic().map(FunctionFamily::Elliptic);
        let spec = match id {
            ModelId::CmRational | ModelId::CmHyperbolic | ModelId::CmElliptic => {
                let family = match id {
                    ModelId::CmRational => FunctionFamily::Rational,
                    ModelId::CmHyperbolic => hyperbolic()?,
                    _ => elliptic()?,
                };
                let coupling = params.coupling(&family);
                ModelSpec::CmSpinless { family, n, coupling }
            }
            ModelId::CmSlN => ModelSpec::CmTrigSl { n },
            ModelId::CmSunn => ModelSpec::CmTrigSunn { n, gamma: params.gamma },
            ModelId::CmSpinRational => ModelSpec::CmSpin {
                family: FunctionFamily::Rational,
                n,
                r: params.rank,
            },
            ModelId::CmSpinHyperbolic => ModelSpec::CmSpin {
                family: hyperbolic()?,
                n,
                r: params.rank,
            },
            ModelId::CmSpinElliptic => ModelSpec::CmSpin {
                family: elliptic()?,
                n,
                r: params.rank,
            },
            ModelId::RsRational => ModelSpec::Rs {
                family: FunctionFamily::Rational,
                n,
                coupling: RsCoupling::rational(params.rs_g, params.beta, params.mass_c2),
                gauge: params.rs_gauge,
            },
            ModelId::RsHyperbolic => ModelSpec::Rs {
                family: hyperbolic()?,
                n,
                coupling: RsCoupling::hyperbolic(params.rs_a, params.beta, params.mass_c2),
                gauge: params.rs_gauge,
            },
            ModelId::RsElliptic => {
                let p = params.elliptic()?;
                let gamma = C64::new(params.rs_gamma[0], params.rs_gamma[1]);
                let coupling = RsCoupling::elliptic(&p, gamma, params.rs_nu, params.beta, params.mass_c2)?;
                ModelSpec::Rs {
                    family: FunctionFamily::Elliptic(p),
                    n,
                    coupling,
                    gauge: params.rs_gauge,
                }
            }
        };
        Model::new(id, spec)
    }

    pub fn new(id: ModelId, spec: ModelSpec) -> Result<Self> {
        match &spec {
            ModelSpec::CmSpin { r, .. } if *r == 0 => {
                return Err(Error::model(id.as_str(), "spin rank must be at least 1"))
            }
            ModelSpec::Rs { coupling, .. } if coupling.beta == 0.0 => {
                return Err(Error::model(id.as_str(), "beta must be non-zero"))
            }
            ModelSpec::CmSpinless { family, .. }
            | ModelSpec::CmSpin { family, .. }
            | ModelSpec::Rs { family, .. } => family.validate()?,
            _ => {}
        }
        Ok(Model { id, spec })
    }

    pub fn id(&self) -> ModelId {
        self.id
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Particle number (`n` for SU(n,n)).
    pub fn n(&self) -> usize {
        match &self.spec {
            ModelSpec::CmSpinless { n, .. }
            | ModelSpec::CmTrigSl { n }
            | ModelSpec::CmTrigSunn { n, .. }
            | ModelSpec::CmSpin { n, .. }
            | ModelSpec::Rs { n, .. } => *n,
        }
    }

    /// Matrix size of the Lax operator.
    pub fn size(&self) -> usize {
        match &self.spec {
            ModelSpec::CmTrigSunn { n, .. } => 2 * n,
            _ => self.n(),
        }
    }

    pub fn family(&self) -> Option<&FunctionFamily> {
        match &self.spec {
            ModelSpec::CmSpinless { family, .. }
            | ModelSpec::CmSpin { family, .. }
            | ModelSpec::Rs { family, .. } => Some(family),
            _ => None,
        }
    }

    /// Whether the Lax operator depends on a spectral argument.
    pub fn has_spectral(&self) -> bool {
        match &self.spec {
            ModelSpec::CmSpinless { family, .. } => matches!(family, FunctionFamily::Elliptic(_)),
            ModelSpec::CmSpin { .. } => true,
            ModelSpec::Rs { family, .. } => matches!(family, FunctionFamily::Elliptic(_)),
            _ => false,
        }
    }

    pub fn is_rs(&self) -> bool {
        matches!(self.spec, ModelSpec::Rs { .. })
    }

    pub fn is_spin(&self) -> bool {
        matches!(self.spec, ModelSpec::CmSpin { .. })
    }

    /// Bracket sign under which the model's structure matrices close.
    pub fn convention(&self) -> Convention {
        match &self.spec {
            ModelSpec::CmSpinless { family, .. } => match family {
                FunctionFamily::Elliptic(_) => Convention::Direct,
                _ => Convention::Reversed,
            },
            ModelSpec::CmTrigSl { .. } | ModelSpec::CmTrigSunn { .. } | ModelSpec::Rs { .. } => {
                Convention::Reversed
            }
            ModelSpec::CmSpin { .. } => Convention::Direct,
        }
    }

    /// Backend used by default for this model.
    pub fn backend(&self) -> BracketBackend {
        if self.is_spin() {
            BracketBackend::CanonicalPlusKirillovF
        } else {
            BracketBackend::CanonicalOnly
        }
    }

    /// Backends worth running for this model.
    pub fn backends(&self) -> Vec<BracketBackend> {
        if self.is_spin() {
            vec![BracketBackend::CanonicalPlusKirillovF, BracketBackend::CanonicalPlusXiEta]
        } else {
            vec![BracketBackend::CanonicalOnly]
        }
    }

    fn need_finite(&self, lambda: Spectral) -> Result<Option<C64>> {
        match lambda {
            Spectral::Finite(z) => Ok(Some(z)),
            Spectral::Infinite if self.has_spectral() => Err(Error::model(
                self.id.as_str(),
                "a finite spectral argument is required",
            )),
            Spectral::Infinite => Ok(None),
        }
    }

    /// The Lax operator at `x`. Spectral-free models ignore `lambda`.
    pub fn lax(&self, x: &PhasePoint, lambda: Spectral) -> Result<CMatrix> {
        self.check_point(x)?;
        match &self.spec {
            ModelSpec::CmSpinless { family, coupling, .. } => {
                let lam = if self.has_spectral() { self.need_finite(lambda)? } else { None };
                cm::lax_spinless(x, family, *coupling, lam)
            }
            ModelSpec::CmTrigSl { .. } => cm::lax_spinless(x, &FunctionFamily::unit_hyperbolic(), C64::new(1.0, 0.0), None),
            ModelSpec::CmTrigSunn { gamma, .. } => cm::lax_sunn(x, *gamma),
            ModelSpec::CmSpin { family, .. } => {
                let lam = self.need_finite(lambda)?.expect("spin models are spectral");
                spin::lax_spin(x, family, lam)
            }
            ModelSpec::Rs {
                family,
                coupling,
                gauge,
                ..
            } => {
                let lam = if self.has_spectral() { lambda } else { Spectral::Infinite };
                if self.has_spectral() {
                    self.need_finite(lambda)?;
                }
                rs::lax_rs(x, family, coupling, *gauge, lam)
            }
        }
    }

    /// Analytic first partials of the Lax operator in the `(q, p, f)` chart.
    pub fn lax_partials(&self, x: &PhasePoint, lambda: Spectral) -> Result<Partials<CMatrix>> {
        self.check_point(x)?;
        match &self.spec {
            ModelSpec::CmSpinless { family, coupling, .. } => {
                let lam = if self.has_spectral() { self.need_finite(lambda)? } else { None };
                cm::lax_spinless_partials(x, family, *coupling, lam)
            }
            ModelSpec::CmTrigSl { .. } => {
                cm::lax_spinless_partials(x, &FunctionFamily::unit_hyperbolic(), C64::new(1.0, 0.0), None)
            }
            ModelSpec::CmTrigSunn { gamma, .. } => cm::lax_sunn_partials(x, *gamma),
            ModelSpec::CmSpin { family, .. } => {
                let lam = self.need_finite(lambda)?.expect("spin models are spectral");
                spin::lax_spin_partials(x, family, lam)
            }
            ModelSpec::Rs {
                family,
                coupling,
                gauge,
                ..
            } => {
                let lam = if self.has_spectral() { lambda } else { Spectral::Infinite };
                if self.has_spectral() {
                    self.need_finite(lambda)?;
                }
                rs::lax_rs_partials(x, family, coupling, *gauge, lam)
            }
        }
    }

    /// The Lax operator as an observable with analytic partials.
    pub fn lax_field(&self, lambda: Spectral) -> ObservableField<CMatrix> {
        let a = self.clone();
        let b = self.clone();
        ObservableField::analytic(
            Arc::new(move |x: &PhasePoint| a.lax(x, lambda)),
            Arc::new(move |x: &PhasePoint| b.lax_partials(x, lambda)),
        )
    }

    /// The r-matrix `r₁₂(λ, μ)` of the linear relation, in the model's convention.
    pub fn r_matrix(&self, x: &PhasePoint, lambda: Spectral, mu: Spectral) -> Result<TensorOperator> {
        self.check_point(x)?;
        match &self.spec {
            // The spinless r-matrices do not depend on the coupling.
            ModelSpec::CmSpinless { family, .. } => match family {
                FunctionFamily::Elliptic(p) => {
                    let (l, m) = (self.need_finite(lambda)?.unwrap(), self.need_finite(mu)?.unwrap());
                    cm::r_cm_elliptic(x, p, l, m)
                }
                _ => cm::r_sl_n(x, family),
            },
            ModelSpec::CmTrigSl { .. } => cm::r_sl_n(x, &FunctionFamily::unit_hyperbolic()),
            ModelSpec::CmTrigSunn { .. } => cm::r_cm_sunn(x),
            ModelSpec::CmSpin { family, .. } => {
                let (l, m) = (self.need_finite(lambda)?.unwrap(), self.need_finite(mu)?.unwrap());
                spin::r_cm_spin(x, family, l, m)
            }
            ModelSpec::Rs { .. } => Err(Error::model(
                self.id.as_str(),
                "RS models carry a quadratic structure, not a linear r-matrix",
            )),
        }
    }

    /// Quadratic structure of an RS model.
    pub fn quad_structure(&self, x: &PhasePoint, lambda: Spectral, mu: Spectral) -> Result<QuadStructure> {
        self.check_point(x)?;
        match &self.spec {
            ModelSpec::Rs { family, coupling, .. } => {
                let (l, m) = if self.has_spectral() {
                    self.need_finite(lambda)?;
                    self.need_finite(mu)?;
                    (lambda, mu)
                } else {
                    (Spectral::Infinite, Spectral::Infinite)
                };
                rs::rs_quad_structure(x, family, coupling, l, m)
            }
            _ => Err(Error::model(self.id.as_str(), "only RS models have a quadratic structure")),
        }
    }

    /// The Hamiltonian as a scalar observable.
    pub fn hamiltonian(&self) -> ObservableField<C64> {
        match &self.spec {
            ModelSpec::Rs { family, coupling, .. } => rs::rs_hamiltonian(family.clone(), coupling.clone()),
            ModelSpec::CmSpin { family, .. } => spin::spin_hamiltonian(family.clone()),
            _ => {
                // ½ Tr L², with the λ-dependent constant removed for the elliptic Lax.
                let lambda = Spectral::Finite(C64::new(0.3, 0.2));
                let constant = match &self.spec {
                    ModelSpec::CmSpinless { family, coupling, n } => {
                        cm::cm_hamiltonian_constant(family, *coupling, *n, lambda).unwrap_or_default()
                    }
                    _ => C64::new(0.0, 0.0),
                };
                let half = self.lax_field(lambda).trace_power(2).map_linear(move |v: &C64| 0.5 * v);
                let eval_half = half.clone();
                ObservableField::analytic(
                    Arc::new(move |x: &PhasePoint| Ok(eval_half.value(x)? - constant)),
                    Arc::new(move |x: &PhasePoint| half.partials(x)),
                )
            }
        }
    }

    /// Distance of `x` to the model's singular set.
    pub fn singular_distance(&self, x: &PhasePoint) -> f64 {
        let q = x.q();
        let n = q.len();
        let mut d = f64::INFINITY;
        let lattice = |z: f64| match self.family() {
            Some(FunctionFamily::Elliptic(p)) => p.lattice_distance(C64::new(z, 0.0)),
            _ => z.abs(),
        };
        for i in 0..n {
            for j in i + 1..n {
                d = d.min(lattice(q[i] - q[j]));
            }
        }
        if let ModelSpec::CmTrigSunn { .. } = self.spec {
            for i in 0..n {
                d = d.min(q[i].abs());
                for j in i + 1..n {
                    d = d.min((q[i] + q[j]).abs());
                }
            }
        }
        d
    }

    fn check_point(&self, x: &PhasePoint) -> Result<()> {
        if x.n() != self.n() {
            return Err(Error::Dimension(format!(
                "{} expects {} particles, point has {}",
                self.id,
                self.n(),
                x.n()
            )));
        }
        if self.is_spin() && x.spin().is_none() {
            return Err(Error::MissingSpin {
                backend: BracketBackend::CanonicalPlusKirillovF,
            });
        }
        Ok(())
    }

    /// Draw a point from the model's sampler.
    pub fn sample(&self, rng: &mut impl rand::Rng, settings: &SamplerSettings, backend: BracketBackend) -> Result<PhasePoint> {
        sample::sample(self, rng, settings, backend)
    }

    /// Short parameter description for reports.
    pub fn describe(&self) -> String {
        match &self.spec {
            ModelSpec::CmSpinless { family, coupling, n } => {
                format!("n={n} family={} coupling={coupling}", family_desc(family))
            }
            ModelSpec::CmTrigSl { n } => format!("n={n}"),
            ModelSpec::CmTrigSunn { n, gamma } => format!("n={n} gamma={gamma}"),
            ModelSpec::CmSpin { family, n, r } => format!("n={n} r={r} family={}", family_desc(family)),
            ModelSpec::Rs {
                family,
                n,
                coupling,
                gauge,
            } => format!(
                "n={n} family={} beta={} mc2={} {:?} gauge={gauge:?}",
                family_desc(family),
                coupling.beta,
                coupling.mass_c2,
                coupling.params
            ),
        }
    }
}

fn family_desc(f: &FunctionFamily) -> String {
    match f {
        FunctionFamily::Rational => "rational".into(),
        FunctionFamily::Hyperbolic { nu } => format!("hyperbolic(nu={nu})"),
        FunctionFamily::Elliptic(p) => format!("elliptic(omega1={}, omega2={})", p.omega1(), p.omega2()),
    }
}
