use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::phase::{ObservableField, Partials, PhasePoint, SpinBlock, SpinPartials};
use crate::specfun::{FunctionFamily, Spectral};
use crate::tensor::{unit, CMatrix, TensorOperator};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn diff(x: &PhasePoint, i: usize, j: usize) -> C64 {
    c(x.q()[i] - x.q()[j])
}

fn spin_of(x: &PhasePoint) -> Result<&SpinBlock> {
    x.spin().ok_or(Error::MissingSpin {
        backend: crate::phase::BracketBackend::CanonicalPlusKirillovF,
    })
}

/// `L(λ) = Σ p_i e_ii + Σ_{i≠j} l(q_i − q_j, λ) f_ij e_ij`.
pub(crate) fn lax_spin(x: &PhasePoint, family: &FunctionFamily, lambda: C64) -> Result<CMatrix> {
    let n = x.n();
    let mut l = CMatrix::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = c(x.p()[i]);
        for j in 0..n {
            if i != j {
                l[(i, j)] = family.l(diff(x, i, j), Some(lambda))? * x.f(i, j);
            }
        }
    }
    spin_of(x)?;
    Ok(l)
}

pub(crate) fn lax_spin_partials(x: &PhasePoint, family: &FunctionFamily, lambda: C64) -> Result<Partials<CMatrix>> {
    spin_of(x)?;
    let n = x.n();
    let dp = (0..n).map(|i| unit(n, i, i)).collect();
    let mut dq = vec![CMatrix::zeros(n, n); n];
    let mut df = vec![CMatrix::zeros(n, n); n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let z = diff(x, i, j);
            let d = family.l_dx(z, Some(lambda))? * x.f(i, j);
            dq[i][(i, j)] += d;
            dq[j][(i, j)] -= d;
            df[i * n + j][(i, j)] = family.l(z, Some(lambda))?;
        }
    }
    Ok(Partials {
        dq,
        dp,
        spin: SpinPartials::F(df),
    })
}

/// `r(λ, μ) = ½ Σ_{i≠j} l(q_ij, λ−μ) e_ij⊗e_ji + ½ Σ_{i≠j} l(q_ij, λ+μ) e_ij⊗e_ij
///            − ½ [ζ(λ+μ) + ζ(λ−μ)] Σ e_ii⊗e_ii`.
pub(crate) fn r_cm_spin(x: &PhasePoint, family: &FunctionFamily, lambda: C64, mu: C64) -> Result<TensorOperator> {
    let n = x.n();
    let mut r = TensorOperator::zeros(n);
    let (minus, plus) = (lambda - mu, lambda + mu);
    let diag = 0.5 * (family.zeta_at(Spectral::Finite(plus))? + family.zeta_at(Spectral::Finite(minus))?);
    for i in 0..n {
        r.add_at(i, i, i, i, -diag);
        for j in 0..n {
            if i == j {
                continue;
            }
            let z = diff(x, i, j);
            r.add_at(i, j, j, i, 0.5 * family.l(z, Some(minus))?);
            r.add_at(i, j, i, j, 0.5 * family.l(z, Some(plus))?);
        }
    }
    Ok(r)
}

/// `H = ½ Σ p_i² − ½ Σ_{i≠j} f_ij f_ji V(q_i − q_j)`.
pub fn spin_hamiltonian(family: FunctionFamily) -> ObservableField<C64> {
    let fam = family.clone();
    let eval = Arc::new(move |x: &PhasePoint| {
        spin_of(x)?;
        let n = x.n();
        let mut h = c(0.5 * x.p().iter().map(|p| p * p).sum::<f64>());
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    h -= 0.5 * x.f(i, j) * x.f(j, i) * fam.v(diff(x, i, j))?;
                }
            }
        }
        Ok(h)
    });
    let partials = Arc::new(move |x: &PhasePoint| {
        spin_of(x)?;
        let n = x.n();
        let dp = x.p().iter().map(|&p| c(p)).collect();
        let mut dq = vec![c(0.0); n];
        let mut df = vec![c(0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let z = diff(x, i, j);
                dq[i] -= x.f(i, j) * x.f(j, i) * family.v_dx(z)?;
                df[i * n + j] = -x.f(j, i) * family.v(z)?;
            }
        }
        Ok(Partials {
            dq,
            dp,
            spin: SpinPartials::F(df),
        })
    });
    ObservableField::analytic(eval, partials)
}

/// Spin block with antisymmetric `f = ξηᵀ`: columns of `η` are paired as
/// `(η_{2b}, η_{2b+1}) = (ξ_{2b+1}, −ξ_{2b})`. An unpaired last column of
/// `η` is zero.
pub fn antisymmetric_spin(n: usize, r: usize, xi: Vec<f64>) -> Result<SpinBlock> {
    if xi.len() != n * r {
        return Err(Error::Dimension(format!("xi needs {n}x{r} entries, got {}", xi.len())));
    }
    let mut eta = vec![0.0; n * r];
    for i in 0..n {
        for b in 0..r / 2 {
            eta[i * r + 2 * b] = xi[i * r + 2 * b + 1];
            eta[i * r + 2 * b + 1] = -xi[i * r + 2 * b];
        }
    }
    SpinBlock::new(n, r, xi, eta)
}
