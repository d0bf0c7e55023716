use num_complex::Complex64 as C64;

use super::{CartanBasis, CheckReport, Measured};
use crate::error::Result;
use crate::models::Model;
use crate::phase::PhasePoint;
use crate::specfun::Spectral;
use crate::tensor::{comm, embed_pair, embed_single, fnorm, transpose_sites, CMatrix, TensorOperator};

/// An r-matrix depending on `q` and two spectral arguments.
pub type RBuilder<'a> = dyn Fn(&PhasePoint, Spectral, Spectral) -> Result<TensorOperator> + 'a;

/// Five-point stencil step for `q`-derivatives of r-matrices, relative to `max(1, |q|)`.
const R_FD_STEP: f64 = 1e-4;

/// `[r₁₂, r₂₃] + [r₁₂, r₁₃] + [r₃₂, r₁₃]` on three sites.
pub fn cybe_terms(r: &TensorOperator) -> CMatrix {
    let (r12, r13, r23, r32) = (
        embed_pair(r, 0, 1),
        embed_pair(r, 0, 2),
        embed_pair(r, 1, 2),
        embed_pair(r, 2, 1),
    );
    comm(&r12, &r23) + comm(&r12, &r13) + comm(&r32, &r13)
}

/// Classical Yang-Baxter equation for a constant r. When r is skew
/// (`r₂₁ = −r₁₂`) the form `[r₁₂,r₁₃] + [r₁₂,r₂₃] + [r₁₃,r₂₃]` is reported too.
pub fn check_cybe_constant(label: &str, r: &TensorOperator, tol: f64) -> CheckReport {
    let j = cybe_terms(r);
    let scale = fnorm(r.matrix()).powi(2);
    let mut m = Measured::new(fnorm(&j), scale);
    let skew = (&transpose_sites(r) + r).fnorm();
    if skew <= 1e-10 * (1.0 + r.fnorm()) {
        let (r12, r13, r23) = (embed_pair(r, 0, 1), embed_pair(r, 0, 2), embed_pair(r, 1, 2));
        let alt = comm(&r12, &r13) + comm(&r12, &r23) + comm(&r13, &r23);
        m = m.note(format!("skew form residual={:.3e}", fnorm(&alt) / scale.max(1.0)));
    } else {
        m = m.note(format!("not skew (defect {skew:.3e})"));
    }
    CheckReport::from_result("cybe-constant", label, r.site_dim(), tol, Ok(m))
}

fn shifted_q(x: &PhasePoint, dir: &[f64], h: f64) -> PhasePoint {
    let mut y = x.clone();
    y.set_q(x.q().iter().zip(dir).map(|(q, d)| q + h * d).collect());
    y
}

/// Directional `q`-derivative of `r(λ, μ)`, five-point stencil.
fn r_derivative(r: &RBuilder, x: &PhasePoint, dir: &[f64], l: Spectral, m: Spectral) -> Result<TensorOperator> {
    let qmax = x.q().iter().fold(1.0f64, |a, q| a.max(q.abs()));
    let h = R_FD_STEP * qmax;
    let at = |k: f64| r(&shifted_q(x, dir, k * h), l, m);
    let near = &at(1.0)? - &at(-1.0)?;
    let far = &at(2.0)? - &at(-2.0)?;
    Ok(&near.scale(C64::new(8.0 / (12.0 * h), 0.0)) - &far.scale(C64::new(1.0 / (12.0 * h), 0.0)))
}

fn spectral(l: [C64; 3]) -> [Spectral; 3] {
    [Spectral::Finite(l[0]), Spectral::Finite(l[1]), Spectral::Finite(l[2])]
}

/// Dynamical CYBE
/// `[r₁₂,r₁₃] + [r₁₂,r₂₃] + [r₁₃,r₂₃] − Σ h_ν⁽¹⁾∂_ν r₂₃ + Σ h_ν⁽²⁾∂_ν r₁₃ − Σ h_ν⁽³⁾∂_ν r₁₂`
/// for an arbitrary r builder.
pub fn check_dynamical_cybe_with(
    label: &str,
    r: &RBuilder,
    x: &PhasePoint,
    lambdas: [C64; 3],
    cartan: &CartanBasis,
    tol: f64,
) -> CheckReport {
    let lam = spectral(lambdas);
    let out = (|| {
        let pair = |a: usize, b: usize| -> Result<CMatrix> { Ok(embed_pair(&r(x, lam[a], lam[b])?, a, b)) };
        let (r12, r13, r23) = (pair(0, 1)?, pair(0, 2)?, pair(1, 2)?);
        let cyb = comm(&r12, &r13) + comm(&r12, &r23) + comm(&r13, &r23);
        let mut shift = CMatrix::zeros(cyb.nrows(), cyb.ncols());
        for (h, d) in cartan.generators.iter().zip(&cartan.directions) {
            let d23 = embed_pair(&r_derivative(r, x, d, lam[1], lam[2])?, 1, 2);
            let d13 = embed_pair(&r_derivative(r, x, d, lam[0], lam[2])?, 0, 2);
            let d12 = embed_pair(&r_derivative(r, x, d, lam[0], lam[1])?, 0, 1);
            shift -= embed_single(h, 0) * d23;
            shift += embed_single(h, 1) * d13;
            shift -= embed_single(h, 2) * d12;
        }
        let total = &cyb + &shift;
        Ok(Measured::new(fnorm(&total), fnorm(&cyb).max(fnorm(&shift)))
            .note(format!("commutator part={:.3e}", fnorm(&cyb)))
            .note(format!("shift part={:.3e}", fnorm(&shift))))
    })();
    CheckReport::from_result("dynamical-cybe", label, x.n(), tol, out)
}

/// Dynamical CYBE for the model's own r-matrix.
pub fn check_dynamical_cybe(model: &Model, x: &PhasePoint, lambdas: [C64; 3], cartan: &CartanBasis, tol: f64) -> CheckReport {
    let r = |y: &PhasePoint, l: Spectral, m: Spectral| model.r_matrix(y, l, m);
    check_dynamical_cybe_with(model.id().as_str(), &r, x, lambdas, cartan, tol)
}

/// Jacobi consequence of the linear relation:
/// `Σ_cyc [L_a, J_abc + {L_b, r_ac} − {L_c, r_ab}]` with
/// `J_abc = [r_ab, r_bc] + [r_ab, r_ac] + [r_cb, r_ac]`.
pub fn check_yb2(model: &Model, x: &PhasePoint, lambdas: [C64; 3], tol: f64) -> CheckReport {
    let lam = spectral(lambdas);
    let out = (|| {
        let n = x.n();
        let eps = C64::new(model.convention().sign(), 0.0);
        let r = |y: &PhasePoint, l: Spectral, m: Spectral| model.r_matrix(y, l, m);
        let mut r_pair = std::collections::HashMap::new();
        let mut dr_pair = std::collections::HashMap::new();
        for a in 0..3 {
            for b in 0..3 {
                if a == b {
                    continue;
                }
                r_pair.insert((a, b), embed_pair(&r(x, lam[a], lam[b])?, a, b));
                let mut ds = Vec::with_capacity(n);
                for v in 0..n {
                    let dir: Vec<f64> = (0..n).map(|u| if u == v { 1.0 } else { 0.0 }).collect();
                    ds.push(embed_pair(&r_derivative(&r, x, &dir, lam[a], lam[b])?, a, b));
                }
                dr_pair.insert((a, b), ds);
            }
        }
        let mut lax = Vec::new();
        let mut dp = Vec::new();
        for a in 0..3 {
            lax.push(embed_single(&model.lax(x, lam[a])?, a));
            let parts = model.lax_partials(x, lam[a])?;
            dp.push(parts.dp.iter().map(|d| embed_single(d, a)).collect::<Vec<_>>());
        }
        // {L_b, r_ac}: r depends on q only
        let bracket = |b: usize, a: usize, c: usize| -> CMatrix {
            let mut acc = CMatrix::zeros(lax[0].nrows(), lax[0].ncols());
            for v in 0..n {
                acc += (&dp[b][v] * &dr_pair[&(a, c)][v]) * eps;
            }
            acc
        };
        let mut total = CMatrix::zeros(lax[0].nrows(), lax[0].ncols());
        let mut scale: f64 = 0.0;
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let rab = &r_pair[&(a, b)];
            let j = comm(rab, &r_pair[&(b, c)]) + comm(rab, &r_pair[&(a, c)]) + comm(&r_pair[&(c, b)], &r_pair[&(a, c)]);
            let inner = &j + bracket(b, a, c) - bracket(c, a, b);
            let term = comm(&lax[a], &inner);
            scale = scale.max(fnorm(&term));
            total += term;
        }
        Ok(Measured::new(fnorm(&total), scale))
    })();
    CheckReport::from_result("yb2", model.id().as_str(), model.n(), tol, out)
}
