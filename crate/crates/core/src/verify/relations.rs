use num_complex::Complex64 as C64;

use super::{CheckReport, Measured};
use crate::error::{Error, Result};
use crate::models::{Model, ModelSpec, QuadStructure};
use crate::phase::{bracket_matrix, poisson_scalar, BracketBackend, Convention, ObservableField, PhasePoint};
use crate::specfun::Spectral;
use crate::tensor::{comm, embed1, embed2, fnorm, transpose_sites, unit, CMatrix, TensorOperator};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `(‖{L₁,L₂} − [r₁₂, L₁] + [r₂₁, L₂]‖, ‖{L₁,L₂}‖)`.
pub fn rma_residual(
    bracket: &TensorOperator,
    r12: &TensorOperator,
    r21: &TensorOperator,
    l1: &CMatrix,
    l2: &CMatrix,
) -> Result<(f64, f64)> {
    let rhs = &r12.comm(&embed1(l1)?) - &r21.comm(&embed2(l2)?);
    Ok(((bracket - &rhs).fnorm(), bracket.fnorm()))
}

/// Linear r-matrix relation in the model's own bracket convention.
pub fn check_linear_rma(
    model: &Model,
    x: &PhasePoint,
    lambda: C64,
    mu: C64,
    backend: BracketBackend,
    tol: f64,
) -> CheckReport {
    check_linear_rma_with(model, x, lambda, mu, backend, model.convention(), tol)
}

pub fn check_linear_rma_with(
    model: &Model,
    x: &PhasePoint,
    lambda: C64,
    mu: C64,
    backend: BracketBackend,
    convention: Convention,
    tol: f64,
) -> CheckReport {
    let out = (|| {
        let (l, m) = (Spectral::Finite(lambda), Spectral::Finite(mu));
        let b = bracket_matrix(&model.lax_field(l), &model.lax_field(m), x, backend, convention)?;
        let r12 = model.r_matrix(x, l, m)?;
        let r21 = transpose_sites(&model.r_matrix(x, m, l)?);
        let (raw, scale) = rma_residual(&b, &r12, &r21, &model.lax(x, l)?, &model.lax(x, m)?)?;
        Ok(Measured::new(raw, scale)
            .note(format!("backend={}", backend.name()))
            .note(format!("convention={convention:?}")))
    })();
    CheckReport::from_result("linear-rma", model.id().as_str(), model.n(), tol, out)
}

/// Linear relation for a supplied pair `(r₁₂, r₂₁)` at arbitrary spectral
/// arguments, e.g. the spectral-free `r` of the symmetric-space models.
pub fn check_linear_rma_given(
    model: &Model,
    x: &PhasePoint,
    spectral: (Spectral, Spectral),
    r12: &TensorOperator,
    r21: &TensorOperator,
    backend: BracketBackend,
    tol: f64,
) -> CheckReport {
    let out = (|| {
        let (l, m) = spectral;
        let conv = model.convention();
        let b = bracket_matrix(&model.lax_field(l), &model.lax_field(m), x, backend, conv)?;
        let (raw, scale) = rma_residual(&b, r12, r21, &model.lax(x, l)?, &model.lax(x, m)?)?;
        Ok(Measured::new(raw, scale).note(format!("backend={}", backend.name())))
    })();
    CheckReport::from_result("linear-rma", model.id().as_str(), model.n(), tol, out)
}

/// `β[(L₁L₂)a₁ − a₂(L₁L₂) + (1⊗L₂)s₁(L₁⊗1) − (L₁⊗1)s₂(1⊗L₂)]`.
pub fn quad_rhs(l1: &CMatrix, l2: &CMatrix, q: &QuadStructure) -> Result<TensorOperator> {
    let e1 = embed1(l1)?;
    let e2 = embed2(l2)?;
    let ll = &e1 * &e2;
    let t = &(&(&ll * &q.a1) - &(&q.a2 * &ll)) + &(&(&(&e2 * &q.s1) * &e1) - &(&(&e1 * &q.s2) * &e2));
    Ok(t.scale(C64::new(q.beta, 0.0)))
}

/// Quadratic relation of an RS model.
pub fn check_quadratic_rs(model: &Model, x: &PhasePoint, lambda: C64, mu: C64, tol: f64) -> CheckReport {
    let out = (|| {
        let (l, m) = (Spectral::Finite(lambda), Spectral::Finite(mu));
        let conv = model.convention();
        let b = bracket_matrix(&model.lax_field(l), &model.lax_field(m), x, BracketBackend::CanonicalOnly, conv)?;
        let q = model.quad_structure(x, l, m)?;
        let rhs = quad_rhs(&model.lax(x, l)?, &model.lax(x, m)?, &q)?;
        let mut out = Measured::new((&b - &rhs).fnorm(), b.fnorm())
            .note(format!("convention={conv:?}"))
            .note(format!("structure consistency={:.3e}", q.consistency()));
        if let ModelSpec::Rs { family, coupling, .. } = model.spec() {
            let n = x.n();
            for i in 0..n {
                for j in 0..n {
                    let z = C64::new(x.q()[i] - x.q()[j], 0.0);
                    if i != j && crate::specfun::rs_branch_warning(z, family, coupling) {
                        out = out.note(format!("branch warning at q{}-q{}", i + 1, j + 1));
                    }
                }
            }
        }
        Ok(out)
    })();
    CheckReport::from_result("quadratic-rs", model.id().as_str(), model.n(), tol, out)
}

/// Linear rewriting of the Sklyanin bracket: with `R₁₂ = r₁₂L₂` and
/// `R₂₁ = −L₁r₁₂`, `[R₁₂, L₁] − [R₂₁, L₂] = [r₁₂, L₁L₂]`. The residual is the
/// gap between the two forms; the quadratic bracket `{L₁, L₂} − [r₁₂, L₁L₂]`
/// for the supplied `L` is reported in the diagnostics.
pub fn check_sklyanin_form(
    label: &str,
    l: &ObservableField<CMatrix>,
    r: &TensorOperator,
    x: &PhasePoint,
    backend: BracketBackend,
    convention: Convention,
    tol: f64,
) -> CheckReport {
    let out = (|| {
        let lm = l.value(x)?;
        let e1 = embed1(&lm)?;
        let e2 = embed2(&lm)?;
        let quadratic = r.comm(&(&e1 * &e2));
        let big_r12 = r * &e2;
        let big_r21 = -&(&e1 * r);
        let linear = &big_r12.comm(&e1) - &big_r21.comm(&e2);
        let b = bracket_matrix(l, l, x, backend, convention)?;
        let bracket_gap = (&b - &quadratic).fnorm() / b.fnorm().max(1.0);
        Ok(Measured::new((&quadratic - &linear).fnorm(), quadratic.fnorm())
            .note(format!("quadratic bracket residual for this L={bracket_gap:.3e}")))
    })();
    CheckReport::from_result("sklyanin", label, x.n(), tol, out)
}

/// `R(X) = Tr₂(r₁₂ (1⊗X))`.
pub fn dual_map(r: &TensorOperator, x: &CMatrix) -> Result<CMatrix> {
    Ok((r * &embed2(x)?).partial_trace2())
}

/// Basis of the space paired with `L` by the trace form: traceless
/// hermitian matrices for `sl(n)`; hermitian elements `[[a, b], [−b, −a]]`
/// (`a` hermitian, `b` antihermitian) for SU(n,n).
pub fn dual_basis(model: &Model) -> Result<Vec<CMatrix>> {
    let herm = |n: usize| {
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push(unit(n, i, j) + unit(n, j, i));
                out.push((unit(n, i, j) - unit(n, j, i)) * I);
            }
        }
        out
    };
    match model.spec() {
        ModelSpec::CmTrigSl { n } => {
            let mut b = herm(*n);
            for i in 0..n.saturating_sub(1) {
                b.push(unit(*n, i, i) - unit(*n, i + 1, i + 1));
            }
            Ok(b)
        }
        ModelSpec::CmTrigSunn { n, .. } => {
            let n = *n;
            let lift = |a: &CMatrix, b: &CMatrix| {
                let mut m = CMatrix::zeros(2 * n, 2 * n);
                m.view_mut((0, 0), (n, n)).copy_from(a);
                m.view_mut((0, n), (n, n)).copy_from(b);
                m.view_mut((n, 0), (n, n)).copy_from(&(-b));
                m.view_mut((n, n), (n, n)).copy_from(&(-a));
                m
            };
            let zero = CMatrix::zeros(n, n);
            let mut hermitian = herm(n);
            for i in 0..n {
                hermitian.push(unit(n, i, i));
            }
            let mut out: Vec<CMatrix> = hermitian.iter().map(|a| lift(a, &zero)).collect();
            out.extend(hermitian.iter().map(|h| lift(&zero, &(h * I))));
            Ok(out)
        }
        _ => Err(Error::model(
            model.id().as_str(),
            "the dual form is defined for cm-sl-n and cm-sunn",
        )),
    }
}

/// `{Tr LX, Tr LY} = Tr L([X, R(Y)] + [R(X), Y])` over all basis pairs.
pub fn check_dual_form(model: &Model, x: &PhasePoint, r: Option<&TensorOperator>, backend: BracketBackend, tol: f64) -> CheckReport {
    let out = (|| {
        let basis = dual_basis(model)?;
        let lam = Spectral::Infinite;
        let r = match r {
            Some(r) => r.clone(),
            None => model.r_matrix(x, lam, lam)?,
        };
        let l = model.lax(x, lam)?;
        let field = model.lax_field(lam);
        let conv = model.convention();
        let pair: Vec<ObservableField<C64>> = basis
            .iter()
            .map(|b| {
                let b = b.clone();
                field.map_linear(move |m: &CMatrix| (m * &b).trace())
            })
            .collect();
        let rx: Vec<CMatrix> = basis.iter().map(|b| dual_map(&r, b)).collect::<Result<_>>()?;
        let (mut total, mut size) = (0.0, 0.0);
        for a in 0..basis.len() {
            for b in 0..basis.len() {
                let lhs = poisson_scalar(&pair[a], &pair[b], x, backend, conv)?;
                let rhs = (&l * (comm(&basis[a], &rx[b]) + comm(&rx[a], &basis[b]))).trace();
                total += (lhs - rhs).norm();
                size += lhs.norm();
            }
        }
        let mut out = Measured::new(total, size).note(format!("basis size={}", basis.len()));
        if let ModelSpec::CmTrigSl { .. } = model.spec() {
            // R(X) lies in the antihermitian subalgebra for SL(n).
            let defect = rx
                .iter()
                .zip(&basis)
                .map(|(m, b)| fnorm(&(m + m.adjoint())) / fnorm(b).max(1.0))
                .fold(0.0, f64::max);
            out = out.note(format!("antihermitian defect of R(X)={defect:.3e}"));
        }
        Ok(out)
    })();
    CheckReport::from_result("dual-form", model.id().as_str(), model.n(), tol, out)
}
