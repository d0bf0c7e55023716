use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::phase::{Partials, PhasePoint, SpinPartials};
use crate::specfun::{EllipticParams, FunctionFamily, Spectral};
use crate::tensor::{identity, unit, CMatrix, TensorOperator, ZERO};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn diff(x: &PhasePoint, k: usize, l: usize) -> C64 {
    c(x.q()[k] - x.q()[l])
}

/// Off-diagonal coefficient of the spinless Lax and its derivative in `q_k − q_l`.
fn pair_entry(family: &FunctionFamily, coupling: C64, lambda: Option<C64>, z: C64) -> Result<(C64, C64)> {
    match family {
        FunctionFamily::Elliptic(_) => Ok((
            coupling * family.l(z, lambda)?,
            coupling * family.l_dx(z, lambda)?,
        )),
        _ => Ok((I * coupling * family.l(z, None)?, I * coupling * family.l_dx(z, None)?)),
    }
}

/// `L = Σ p_i e_ii + Σ_{k≠l} a(q_k − q_l) e_kl` with `a = i·g·l(x)` for the
/// degenerate families and `a = g·l(x, λ)` for the elliptic one.
pub(crate) fn lax_spinless(x: &PhasePoint, family: &FunctionFamily, coupling: C64, lambda: Option<C64>) -> Result<CMatrix> {
    let n = x.n();
    let mut l = CMatrix::zeros(n, n);
    for k in 0..n {
        l[(k, k)] = c(x.p()[k]);
        for m in 0..n {
            if m != k && coupling != ZERO {
                l[(k, m)] = pair_entry(family, coupling, lambda, diff(x, k, m))?.0;
            }
        }
    }
    Ok(l)
}

pub(crate) fn lax_spinless_partials(
    x: &PhasePoint,
    family: &FunctionFamily,
    coupling: C64,
    lambda: Option<C64>,
) -> Result<Partials<CMatrix>> {
    let n = x.n();
    let dp = (0..n).map(|i| unit(n, i, i)).collect();
    let mut dq = vec![CMatrix::zeros(n, n); n];
    if coupling != ZERO {
        for k in 0..n {
            for m in 0..n {
                if m != k {
                    let d = pair_entry(family, coupling, lambda, diff(x, k, m))?.1;
                    dq[k][(k, m)] += d;
                    dq[m][(k, m)] -= d;
                }
            }
        }
    }
    Ok(Partials {
        dq,
        dp,
        spin: SpinPartials::None,
    })
}

/// `(N(N−1)/2)·g²·℘(λ)`, the constant in `½ Tr L²` of the elliptic Lax.
pub fn cm_hamiltonian_constant(family: &FunctionFamily, coupling: C64, n: usize, lambda: Spectral) -> Result<C64> {
    match (family, lambda) {
        (FunctionFamily::Elliptic(p), Spectral::Finite(l)) => {
            Ok(coupling * coupling * c((n * (n.saturating_sub(1))) as f64 / 2.0) * p.wp(l)?)
        }
        _ => Ok(ZERO),
    }
}

/// `r = Σ_{k≠l} ζ(q_kl) E_kl⊗E_lk + ½ Σ_{k≠l} l(q_kl) (E_kk − 1/n)⊗(E_kl − E_lk)`
/// with `ζ`, `l` the family's spectral-free kernels.
pub(crate) fn r_sl_n(x: &PhasePoint, family: &FunctionFamily) -> Result<TensorOperator> {
    let n = x.n();
    let mut r = TensorOperator::zeros(n);
    let id = identity(n) * c(1.0 / n as f64);
    for k in 0..n {
        for l in 0..n {
            if k == l {
                continue;
            }
            let z = diff(x, k, l);
            r.add_at(k, l, l, k, family.coth(z)?);
            let a = unit(n, k, k) - &id;
            let b = unit(n, k, l) - unit(n, l, k);
            r.add_kron(0.5 * family.l(z, None)?, &a, &b);
        }
    }
    Ok(r)
}

/// `−Σ_{k≠l} Φ(q_k − q_l, ∞) E_kl⊗E_lk − ζ(∞) Σ E_kk⊗E_kk`: the exchange
/// part of the `sl(n)` r-matrix, shifted by a multiple of the swap so that
/// it solves the dynamical CYBE with unit Cartan shifts.
pub fn r_exchange(x: &PhasePoint, family: &FunctionFamily) -> Result<TensorOperator> {
    let n = x.n();
    let mut r = TensorOperator::zeros(n);
    let shift = family.zeta_at(Spectral::Infinite)?;
    for k in 0..n {
        r.add_at(k, k, k, k, -shift);
        for l in 0..n {
            if k != l {
                r.add_at(k, l, l, k, -family.phi(diff(x, k, l), Spectral::Infinite)?);
            }
        }
    }
    Ok(r)
}

/// Elliptic r-matrix of the Krichever Lax:
/// `Σ l(q_ij, λ−μ) e_ij⊗e_ji + ½ Σ l(q_ij, μ)(e_ii+e_jj)⊗e_ij − [ζ(λ−μ)+ζ(μ)] Σ e_ii⊗e_ii`.
pub(crate) fn r_cm_elliptic(x: &PhasePoint, p: &EllipticParams, lambda: C64, mu: C64) -> Result<TensorOperator> {
    let n = x.n();
    let mut r = TensorOperator::zeros(n);
    let diag = p.zeta(lambda - mu)? + p.zeta(mu)?;
    for i in 0..n {
        r.add_at(i, i, i, i, -diag);
        for j in 0..n {
            if i == j {
                continue;
            }
            let z = diff(x, i, j);
            r.add_at(i, j, j, i, p.l(z, lambda - mu)?);
            let h = 0.5 * p.l(z, mu)?;
            r.add_at(i, i, i, j, h);
            r.add_at(j, j, i, j, h);
        }
    }
    Ok(r)
}

/// `r_ells − (a(λ,μ) − s*(μ))`, which reduces to
/// `½ Σ_{i≠j} l(q_ij, μ)(e_ii − e_jj)⊗e_ij`.
pub fn ells_decomposition_gap(x: &PhasePoint, p: &EllipticParams, lambda: C64, mu: C64) -> Result<TensorOperator> {
    let fam = FunctionFamily::Elliptic(p.clone());
    let r = r_cm_elliptic(x, p, lambda, mu)?;
    let a = super::rs::structure_a(x, &fam, Spectral::Finite(lambda), Spectral::Finite(mu))?;
    let s_star = super::rs::structure_s_star(x, &fam, Spectral::Finite(mu))?;
    Ok(&(&r - &a) + &s_star)
}

/// SU(n,n) Lax operator on `C^{2n}`. Each written generator `c·X` enters
/// as `c·X + (c·X)†`, so `i E_ij` contributes `i(E_ij − E_ji)`.
pub(crate) fn lax_sunn(x: &PhasePoint, gamma: f64) -> Result<CMatrix> {
    let (l, _) = sunn_terms(x, gamma, false)?;
    Ok(l)
}

pub(crate) fn lax_sunn_partials(x: &PhasePoint, gamma: f64) -> Result<Partials<CMatrix>> {
    let (_, dq) = sunn_terms(x, gamma, true)?;
    let n = x.n();
    let dp = (0..n)
        .map(|i| unit(2 * n, i, i) - unit(2 * n, i + n, i + n))
        .collect();
    Ok(Partials {
        dq,
        dp,
        spin: SpinPartials::None,
    })
}

fn sunn_terms(x: &PhasePoint, gamma: f64, want_dq: bool) -> Result<(CMatrix, Vec<CMatrix>)> {
    let n = x.n();
    let big = 2 * n;
    let q = x.q();
    let mut l = CMatrix::zeros(big, big);
    let mut dq = if want_dq { vec![CMatrix::zeros(big, big); n] } else { Vec::new() };
    for i in 0..n {
        l[(i, i)] = c(x.p()[i]);
        l[(i + n, i + n)] = c(-x.p()[i]);
    }
    let e = |a: usize, b: usize| unit(big, a, b);
    // adds c·G + conj(c)·G† together with its q-derivatives
    let mut add = |g: CMatrix, coef: C64, dcoef: &[(usize, C64)]| {
        let gd = g.adjoint();
        l += &g * coef + &gd * coef.conj();
        if want_dq {
            for &(m, d) in dcoef {
                dq[m] += &g * d + &gd * d.conj();
            }
        }
    };
    let inv_sinh = |z: f64| -> Result<(f64, f64)> {
        let s = z.sinh();
        if s.abs() < crate::specfun::POLE_GUARD {
            return Err(crate::Error::domain("lax_sunn", format!("sinh({z}) vanishes")));
        }
        Ok((1.0 / s, -z.cosh() / (s * s)))
    };
    for i in 0..n {
        for j in i + 1..n {
            let (v, d) = inv_sinh(q[i] - q[j])?;
            add(e(i, j) + e(j + n, i + n), I * v, &[(i, I * d), (j, -I * d)]);
            let (v, d) = inv_sinh(q[i] + q[j])?;
            add(e(i, j + n) + e(j, i + n), I * v, &[(i, I * d), (j, I * d)]);
        }
        let (v, d) = inv_sinh(2.0 * q[i])?;
        let k = gamma + 1.0;
        add(e(i, i + n), I * k * v, &[(i, I * k * 2.0 * d)]);
    }
    Ok((l, dq))
}

fn sunn_r(x: &PhasePoint, weight: f64) -> Result<TensorOperator> {
    let n = x.n();
    let big = 2 * n;
    let q = x.q();
    let e = |a: usize, b: usize| unit(big, a, b);
    let id = identity(big) * c(1.0 / n as f64);
    let mut r = TensorOperator::zeros(big);
    let coth = |z: f64| -> Result<f64> {
        if z.abs() < crate::specfun::POLE_GUARD {
            return Err(crate::Error::domain("r_cm_sunn", "coincident coordinates"));
        }
        Ok(1.0 / z.tanh())
    };
    for k in 0..n {
        let cartan = e(k, k) + e(k + n, k + n) - &id;
        for l in 0..n {
            if k != l {
                let z = q[k] - q[l];
                r.add_kron(c(weight * coth(z)?), &(e(k, l) + e(k + n, l + n)), &(e(l, k) - e(l + n, k + n)));
                r.add_kron(c(weight / z.sinh()), &cartan, &(e(k, l) - e(k + n, l + n)));
            }
            let z = q[k] + q[l];
            r.add_kron(c(weight * coth(z)?), &(e(k, l + n) + e(k + n, l)), &(e(l + n, k) - e(l, k + n)));
            r.add_kron(c(weight / z.sinh()), &cartan, &(e(k, l + n) - e(k + n, l)));
        }
    }
    Ok(r)
}

/// SU(n,n) r-matrix: the four double sums over `coth(q_k ∓ q_l)` and
/// `1/sinh(q_k ∓ q_l)`, each with unit weight.
pub(crate) fn r_cm_sunn(x: &PhasePoint) -> Result<TensorOperator> {
    sunn_r(x, 1.0)
}

/// The same sums with the overall factor ½ in front of each.
pub fn r_cm_sunn_displayed(x: &PhasePoint) -> Result<TensorOperator> {
    sunn_r(x, 0.5)
}
