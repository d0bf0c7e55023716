//! Residual checkers. Every checker returns a [`CheckReport`]; errors raised
//! while building operators become failed reports with the error in the
//! diagnostics.

mod degeneration;
mod dynamics;
mod relations;
mod yang_baxter;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Model, ModelSpec};
use crate::tensor::{unit, CMatrix};

pub use degeneration::{check_degeneration, degeneration_lattice, DegenerationMismatch};
pub use dynamics::{
    check_hamiltonian_involution, check_involution, check_isospectral, IsospectralOptions, IsospectralOutcome,
};
pub use relations::{
    check_dual_form, check_linear_rma, check_linear_rma_given, check_linear_rma_with, check_quadratic_rs, check_sklyanin_form,
    dual_basis, dual_map, quad_rhs, rma_residual,
};
pub use yang_baxter::{
    check_cybe_constant, check_dynamical_cybe, check_dynamical_cybe_with, check_yb2, cybe_terms, RBuilder,
};

/// Default spectral arguments.
pub const DEFAULT_LAMBDA: C64 = C64 { re: 0.3, im: 0.2 };
pub const DEFAULT_MU: C64 = C64 { re: 0.1, im: -0.15 };
pub const DEFAULT_NU: C64 = C64 { re: -0.2, im: 0.05 };

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub model: String,
    pub n: usize,
    pub seed: Option<u64>,
    /// Normalized residual; non-finite values serialize as `null`.
    #[serde(with = "finite_or_null")]
    pub residual: f64,
    pub scale: f64,
    pub tol: f64,
    pub pass: bool,
    pub diagnostics: Vec<String>,
    /// Whether a failure of this check counts against the run.
    pub gated: bool,
}

impl CheckReport {
    /// Report for a raw residual, normalized by `max(1, scale)`.
    pub fn from_residual(name: &str, model: &str, n: usize, raw: f64, scale: f64, tol: f64) -> Self {
        let scale = if scale.is_finite() { scale.max(1.0) } else { 1.0 };
        let residual = if raw.is_finite() { raw / scale } else { f64::INFINITY };
        CheckReport {
            name: name.to_string(),
            model: model.to_string(),
            n,
            seed: None,
            residual,
            scale,
            tol,
            pass: residual.is_finite() && residual < tol,
            diagnostics: Vec::new(),
            gated: true,
        }
    }

    /// Failed report carrying an error.
    pub fn failure(name: &str, model: &str, n: usize, tol: f64, err: &Error) -> Self {
        let mut r = Self::from_residual(name, model, n, f64::INFINITY, 1.0, tol);
        r.diagnostics.push(format!("error: {err}"));
        r
    }

    pub(crate) fn from_result(name: &str, model: &str, n: usize, tol: f64, out: Result<Measured>) -> Self {
        match out {
            Ok(m) => {
                let mut r = Self::from_residual(name, model, n, m.raw, m.scale, tol);
                r.diagnostics = m.notes;
                r
            }
            Err(e) => Self::failure(name, model, n, tol, &e),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.diagnostics.push(s.into());
        self
    }

    /// Mark as reported only.
    pub fn ungated(mut self) -> Self {
        self.gated = false;
        self
    }

    /// Whether this report makes a run fail.
    pub fn blocks(&self) -> bool {
        self.gated && !self.pass
    }
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Raw residual, its scale and notes.
pub(crate) struct Measured {
    pub raw: f64,
    pub scale: f64,
    pub notes: Vec<String>,
}

impl Measured {
    pub fn new(raw: f64, scale: f64) -> Self {
        Measured {
            raw,
            scale,
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }
}

/// Cartan generators `h_ν` with the direction in `q`-space that `∂_{x_ν}` differentiates along.
#[derive(Clone, Debug)]
pub struct CartanBasis {
    pub generators: Vec<CMatrix>,
    pub directions: Vec<Vec<f64>>,
}

impl CartanBasis {
    pub fn new(generators: Vec<CMatrix>, directions: Vec<Vec<f64>>) -> Result<Self> {
        if generators.len() != directions.len() || generators.is_empty() {
            return Err(Error::Dimension("Cartan basis needs one direction per generator".into()));
        }
        let dim = generators[0].nrows();
        let tol = 1e-12;
        for (i, a) in generators.iter().enumerate() {
            if a.nrows() != dim || a.ncols() != dim {
                return Err(Error::Dimension("Cartan generators differ in size".into()));
            }
            for b in &generators[i + 1..] {
                if crate::tensor::fnorm(&(a * b - b * a)) > tol * (1.0 + crate::tensor::fnorm(a) * crate::tensor::fnorm(b)) {
                    return Err(Error::InvalidParams("Cartan generators do not commute".into()));
                }
            }
        }
        let flat = DMatrix::<C64>::from_fn(dim * dim, generators.len(), |r, c| generators[c][(r / dim, r % dim)]);
        let rank = flat.svd(false, false).rank(1e-10);
        if rank < generators.len() {
            return Err(Error::InvalidParams("Cartan generators are linearly dependent".into()));
        }
        Ok(CartanBasis { generators, directions })
    }

    /// `h_ν = e_νν`, `x_ν = q_ν` (SU(n,n): `h_ν = e_νν − e_{ν+n,ν+n}`).
    pub fn standard(model: &Model) -> Self {
        let n = model.n();
        let size = model.size();
        let generators = (0..n)
            .map(|v| match model.spec() {
                ModelSpec::CmTrigSunn { .. } => unit(size, v, v) - unit(size, v + n, v + n),
                _ => unit(size, v, v),
            })
            .collect();
        let directions = (0..n)
            .map(|v| (0..n).map(|u| if u == v { 1.0 } else { 0.0 }).collect())
            .collect();
        CartanBasis { generators, directions }
    }

    /// New basis `h'_μ = Σ_ν A_μν h_ν` with directions `d'_μ = Σ_ν (A⁻ᵀ)_μν d_ν`,
    /// which leaves `Σ_ν h_ν ⊗ ∂_ν` unchanged.
    pub fn transformed(&self, a: &DMatrix<f64>) -> Result<Self> {
        let k = self.generators.len();
        if a.nrows() != k || a.ncols() != k {
            return Err(Error::Dimension(format!("basis change must be {k}x{k}")));
        }
        let inv_t = a
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParams("basis change is singular".into()))?
            .transpose();
        let dim = self.directions[0].len();
        let generators = (0..k)
            .map(|m| {
                (0..k).fold(CMatrix::zeros(self.generators[0].nrows(), self.generators[0].ncols()), |acc, v| {
                    acc + &self.generators[v] * C64::new(a[(m, v)], 0.0)
                })
            })
            .collect();
        let directions = (0..k)
            .map(|m| {
                (0..dim)
                    .map(|u| (0..k).map(|v| inv_t[(m, v)] * self.directions[v][u]).sum())
                    .collect()
            })
            .collect();
        CartanBasis::new(generators, directions)
    }
}
