//! Ruijsenaars-Schneider models: Lax operator, Hamiltonian and the
//! quadratic structure `(a, s, s*, w)`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{ObservableField, Partials, PhasePoint, SpinPartials};
use crate::specfun::{rs_f, rs_radicand, rs_radicand_dq, EllipticParams, FunctionFamily, Spectral};
use crate::tensor::{CMatrix, TensorOperator};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Family-specific RS couplings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RsParams {
    /// `f² = 1 + g²/q²`, `C = γ/(γ + iq)`.
    Rational { g: f64, gamma: f64 },
    /// `f² = 1 + α²/sinh²(νq/2)`, `C = 1/(cosh(νq/2) + ia·sinh(νq/2))`.
    Hyperbolic { alpha: f64, a: f64 },
    /// `f² = λ + ν℘(q)`, `C = Φ(q + γ, λ)/Φ(γ, λ)`.
    Elliptic { gamma: C64, lambda_e: C64, nu_e: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RsCoupling {
    pub beta: f64,
    pub mass_c2: f64,
    pub params: RsParams,
}

impl RsCoupling {
    /// Rational coupling with the C-factor parameter tied to `g`.
    pub fn rational(g: f64, beta: f64, mass_c2: f64) -> Self {
        RsCoupling {
            beta,
            mass_c2,
            params: RsParams::Rational { g, gamma: g },
        }
    }

    /// Hyperbolic coupling with `α = 1/√(1 + a²)`.
    pub fn hyperbolic(a: f64, beta: f64, mass_c2: f64) -> Self {
        RsCoupling {
            beta,
            mass_c2,
            params: RsParams::Hyperbolic {
                alpha: 1.0 / (1.0 + a * a).sqrt(),
                a,
            },
        }
    }

    /// Elliptic coupling with `λ = −ν℘(γ)`, so that `f² = ν(℘(q) − ℘(γ))`.
    pub fn elliptic(p: &EllipticParams, gamma: C64, nu_e: f64, beta: f64, mass_c2: f64) -> Result<Self> {
        if !(nu_e > 0.0) {
            return Err(Error::InvalidParams(format!("RS elliptic scale must be positive, got {nu_e}")));
        }
        let lambda_e = -nu_e * p.wp(gamma)?;
        Ok(RsCoupling {
            beta,
            mass_c2,
            params: RsParams::Elliptic { gamma, lambda_e, nu_e },
        })
    }
}

/// Placement of the C-factor and potential products in the Lax operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RsGauge {
    /// `L_jk = e^{βθ_j} C(q_j − q_k) [F_j F_k]^{1/2}`.
    Symmetric,
    /// `L_jk = C̃(q_j − q_k) e^{βθ_k} F_k` with `C̃(q) = Φ(q + γ̃, λ)/Φ(γ̃, λ)`.
    Column,
}

impl Default for RsGauge {
    fn default() -> Self {
        RsGauge::Column
    }
}

/// The shift `γ̃` for which `Φ(q + γ̃, λ)/Φ(γ̃, λ)` reproduces the family's C-factor.
fn phi_shift(family: &FunctionFamily, coupling: &RsCoupling) -> Result<C64> {
    match (&coupling.params, family) {
        (RsParams::Rational { gamma, .. }, FunctionFamily::Rational) => Ok(-I * *gamma),
        (RsParams::Hyperbolic { a, .. }, FunctionFamily::Hyperbolic { nu }) => {
            // coth(νγ̃/2) = i·a
            Ok(-I * (2.0 / nu) * 1.0f64.atan2(*a))
        }
        (RsParams::Elliptic { gamma, .. }, FunctionFamily::Elliptic(_)) => Ok(*gamma),
        _ => Err(Error::InvalidParams(format!(
            "RS coupling does not match the {} family",
            family.name()
        ))),
    }
}

/// C-factor as displayed: `γ/(γ + iq)`, `1/(cosh(νq/2) + ia·sinh(νq/2))`,
/// `Φ(q + γ, λ)/Φ(γ, λ)`.
pub fn c_factor(q: C64, family: &FunctionFamily, coupling: &RsCoupling, lambda: Spectral) -> Result<C64> {
    Ok(c_factor_log_dx(q, family, coupling, lambda, RsGauge::Symmetric)?.0)
}

/// `(C(q), C′(q)/C(q))` for either gauge.
fn c_factor_log_dx(
    q: C64,
    family: &FunctionFamily,
    coupling: &RsCoupling,
    lambda: Spectral,
    gauge: RsGauge,
) -> Result<(C64, C64)> {
    let phi_form = |shift: C64| -> Result<(C64, C64)> {
        let num = family.phi(q + shift, lambda)?;
        let den = family.phi(shift, lambda)?;
        Ok((num / den, family.phi_dx(q + shift, lambda)? / num))
    };
    match (gauge, &coupling.params, family) {
        (_, RsParams::Elliptic { gamma, .. }, FunctionFamily::Elliptic(_)) => phi_form(*gamma),
        (RsGauge::Column, _, _) => phi_form(phi_shift(family, coupling)?),
        (RsGauge::Symmetric, RsParams::Rational { gamma, .. }, FunctionFamily::Rational) => {
            let d = *gamma + I * q;
            if d.norm() < crate::specfun::POLE_GUARD {
                return Err(Error::domain("c_factor", "gamma + iq vanishes"));
            }
            Ok((*gamma / d, -I / d))
        }
        (RsGauge::Symmetric, RsParams::Hyperbolic { a, .. }, FunctionFamily::Hyperbolic { nu }) => {
            let u = 0.5 * nu * q;
            let d = u.cosh() + I * a * u.sinh();
            if d.norm() < crate::specfun::POLE_GUARD {
                return Err(Error::domain("c_factor", "cosh + ia sinh vanishes"));
            }
            Ok((1.0 / d, -0.5 * nu * (u.sinh() + I * a * u.cosh()) / d))
        }
        _ => Err(Error::InvalidParams(format!(
            "RS coupling does not match the {} family",
            family.name()
        ))),
    }
}

/// `F_k = Π_{m≠k} f(q_k − q_m)` and `∂_{q_m} log F_k`.
fn potential_products(x: &PhasePoint, family: &FunctionFamily, coupling: &RsCoupling) -> Result<(Vec<C64>, Vec<Vec<C64>>)> {
    let n = x.n();
    let q = x.q();
    let mut prod = vec![c(1.0); n];
    let mut dlog = vec![vec![c(0.0); n]; n];
    for k in 0..n {
        for m in 0..n {
            if m == k {
                continue;
            }
            let z = c(q[k] - q[m]);
            prod[k] *= rs_f(z, family, coupling)?;
            let g = rs_radicand_dq(z, family, coupling)? / (2.0 * rs_radicand(z, family, coupling)?);
            dlog[k][k] += g;
            dlog[k][m] -= g;
        }
    }
    Ok((prod, dlog))
}

pub(crate) fn lax_rs(
    x: &PhasePoint,
    family: &FunctionFamily,
    coupling: &RsCoupling,
    gauge: RsGauge,
    lambda: Spectral,
) -> Result<CMatrix> {
    Ok(lax_rs_full(x, family, coupling, gauge, lambda, false)?.0)
}

pub(crate) fn lax_rs_partials(
    x: &PhasePoint,
    family: &FunctionFamily,
    coupling: &RsCoupling,
    gauge: RsGauge,
    lambda: Spectral,
) -> Result<Partials<CMatrix>> {
    Ok(lax_rs_full(x, family, coupling, gauge, lambda, true)?.1)
}

fn lax_rs_full(
    x: &PhasePoint,
    family: &FunctionFamily,
    coupling: &RsCoupling,
    gauge: RsGauge,
    lambda: Spectral,
    want_partials: bool,
) -> Result<(CMatrix, Partials<CMatrix>)> {
    let n = x.n();
    let q = x.q();
    let th = x.p();
    let beta = coupling.beta;
    let (prod, dlog) = potential_products(x, family, coupling)?;
    let mut l = CMatrix::zeros(n, n);
    let mut dq = vec![CMatrix::zeros(n, n); if want_partials { n } else { 0 }];
    let mut dp = vec![CMatrix::zeros(n, n); if want_partials { n } else { 0 }];
    for j in 0..n {
        for k in 0..n {
            let (cf, clog) = c_factor_log_dx(c(q[j] - q[k]), family, coupling, lambda, gauge)?;
            let (v, rap, weights) = match gauge {
                RsGauge::Column => (cf * (beta * th[k]).exp() * prod[k], k, [(k, 1.0), (k, 0.0)]),
                RsGauge::Symmetric => (
                    cf * (beta * th[j]).exp() * (prod[j] * prod[k]).sqrt(),
                    j,
                    [(j, 0.5), (k, 0.5)],
                ),
            };
            l[(j, k)] = v;
            if want_partials {
                dp[rap][(j, k)] += beta * v;
                if j != k {
                    dq[j][(j, k)] += v * clog;
                    dq[k][(j, k)] -= v * clog;
                }
                for m in 0..n {
                    let dl: C64 = weights.iter().map(|&(idx, w)| w * dlog[idx][m]).sum();
                    dq[m][(j, k)] += v * dl;
                }
            }
        }
    }
    Ok((
        l,
        Partials {
            dq,
            dp,
            spin: SpinPartials::None,
        },
    ))
}

/// `H = mc² Σ_j cosh θ_j Π_{k≠j} f(q_k − q_j)`.
pub fn rs_hamiltonian(family: FunctionFamily, coupling: RsCoupling) -> ObservableField<C64> {
    let (f1, c1) = (family.clone(), coupling.clone());
    let eval = Arc::new(move |x: &PhasePoint| {
        let (prod, _) = potential_products(x, &f1, &c1)?;
        Ok(c1.mass_c2 * x.p().iter().zip(&prod).map(|(t, f)| t.cosh() * f).sum::<C64>())
    });
    let partials = Arc::new(move |x: &PhasePoint| {
        let n = x.n();
        let (prod, dlog) = potential_products(x, &family, &coupling)?;
        let m = coupling.mass_c2;
        let th = x.p();
        let dp = (0..n).map(|j| m * th[j].sinh() * prod[j]).collect();
        let dq = (0..n)
            .map(|a| (0..n).map(|j| m * th[j].cosh() * prod[j] * dlog[j][a]).sum())
            .collect();
        Ok(Partials {
            dq,
            dp,
            spin: SpinPartials::None,
        })
    });
    ObservableField::analytic(eval, partials)
}

/// Quadratic structure matrices. The relation they enter is scaled by `β`.
#[derive(Clone, Debug)]
pub struct QuadStructure {
    pub a: TensorOperator,
    pub s: TensorOperator,
    pub s_star: TensorOperator,
    pub w: TensorOperator,
    pub a1: TensorOperator,
    pub a2: TensorOperator,
    pub s1: TensorOperator,
    pub s2: TensorOperator,
    pub beta: f64,
}

impl QuadStructure {
    pub fn assemble(a: TensorOperator, s: TensorOperator, s_star: TensorOperator, w: TensorOperator, beta: f64) -> Self {
        let a1 = &a + &w;
        let s1 = &s - &w;
        let a2 = &(&(&a + &s) - &s_star) - &w;
        let s2 = &s_star + &w;
        QuadStructure {
            a,
            s,
            s_star,
            w,
            a1,
            a2,
            s1,
            s2,
            beta,
        }
    }

    /// Largest deviation of `(a₁, a₂, s₁, s₂)` from their definitions.
    pub fn consistency(&self) -> f64 {
        let d1 = (&(&self.a1 - &self.a) - &self.w).fnorm();
        let d2 = (&(&self.s1 + &self.w) - &self.s).fnorm();
        let d3 = (&self.a2 - &(&(&(&self.a + &self.s) - &self.s_star) - &self.w)).fnorm();
        let d4 = (&self.s2 - &(&self.s_star + &self.w)).fnorm();
        d1.max(d2).max(d3).max(d4)
    }
}

fn qd(x: &PhasePoint, j: usize, k: usize) -> C64 {
    c(x.q()[j] - x.q()[k])
}

/// `a(λ,μ) = −ζ(λ−μ) Σ E_kk⊗E_kk − Σ_{k≠j} Φ(q_j − q_k, λ−μ) E_jk⊗E_kj`.
/// With both arguments at infinity: `−Σ_{k≠j} ζ(q_j − q_k) E_jk⊗E_kj`.
pub(crate) fn structure_a(x: &PhasePoint, family: &FunctionFamily, lambda: Spectral, mu: Spectral) -> Result<TensorOperator> {
    let n = x.n();
    let mut t = TensorOperator::zeros(n);
    match (lambda, mu) {
        (Spectral::Finite(l), Spectral::Finite(m)) => {
            let d = Spectral::Finite(l - m);
            let z = family.zeta_at(d)?;
            for k in 0..n {
                t.add_at(k, k, k, k, -z);
                for j in 0..n {
                    if j != k {
                        t.add_at(j, k, k, j, -family.phi(qd(x, j, k), d)?);
                    }
                }
            }
        }
        (Spectral::Infinite, Spectral::Infinite) => {
            for k in 0..n {
                for j in 0..n {
                    if j != k {
                        t.add_at(j, k, k, j, -family.coth(qd(x, j, k))?);
                    }
                }
            }
        }
        _ => {
            return Err(Error::domain(
                "structure_a",
                "spectral arguments must be both finite or both infinite",
            ))
        }
    }
    Ok(t)
}

/// `s(λ) = ζ(λ) Σ E_kk⊗E_kk + Σ_{k≠j} Φ(q_j − q_k, λ) E_jk⊗E_kk`.
pub(crate) fn structure_s(x: &PhasePoint, family: &FunctionFamily, lambda: Spectral) -> Result<TensorOperator> {
    let n = x.n();
    let mut t = TensorOperator::zeros(n);
    let z = family.zeta_at(lambda)?;
    for k in 0..n {
        t.add_at(k, k, k, k, z);
        for j in 0..n {
            if j != k {
                t.add_at(j, k, k, k, family.phi(qd(x, j, k), lambda)?);
            }
        }
    }
    Ok(t)
}

/// `s*(μ) = ζ(μ) Σ E_kk⊗E_kk + Σ_{k≠j} Φ(q_j − q_k, μ) E_kk⊗E_jk`.
pub(crate) fn structure_s_star(x: &PhasePoint, family: &FunctionFamily, mu: Spectral) -> Result<TensorOperator> {
    let n = x.n();
    let mut t = TensorOperator::zeros(n);
    let z = family.zeta_at(mu)?;
    for k in 0..n {
        t.add_at(k, k, k, k, z);
        for j in 0..n {
            if j != k {
                t.add_at(k, k, j, k, family.phi(qd(x, j, k), mu)?);
            }
        }
    }
    Ok(t)
}

/// `w = Σ_{k≠j} ζ(q_k − q_j) E_kk⊗E_jj`.
pub(crate) fn structure_w(x: &PhasePoint, family: &FunctionFamily) -> Result<TensorOperator> {
    let n = x.n();
    let mut t = TensorOperator::zeros(n);
    for k in 0..n {
        for j in 0..n {
            if j != k {
                t.add_at(k, k, j, j, family.coth(qd(x, k, j))?);
            }
        }
    }
    Ok(t)
}

/// Quadratic structure at `(λ, μ)`; both infinite for the spectral-free forms.
pub fn rs_quad_structure(
    x: &PhasePoint,
    family: &FunctionFamily,
    coupling: &RsCoupling,
    lambda: Spectral,
    mu: Spectral,
) -> Result<QuadStructure> {
    let a = structure_a(x, family, lambda, mu)?;
    let s = structure_s(x, family, lambda)?;
    let s_star = structure_s_star(x, family, mu)?;
    let w = structure_w(x, family)?;
    Ok(QuadStructure::assemble(a, s, s_star, w, coupling.beta))
}
