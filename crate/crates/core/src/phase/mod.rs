//! Phase space, observables and the Poisson-bracket engine.
//!
//! Brackets are assembled from gradients in a flat chart chosen by the
//! [`BracketBackend`]: `(q, p)`, `(q, p, ξ, η)` or `(q, p, f)`. The Poisson
//! tensor of each chart is a sparse list of `(a, b, {x_a, x_b})` triples.

mod field;
mod flow;
mod point;

use serde::{Deserialize, Serialize};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::{CMatrix, TensorOperator};

pub use field::{
    DerivativeSpec, Evaluator, FieldValue, ObservableField, Partials, PartialsFn, SpinPartials,
    DEFAULT_FD_STEP,
};
pub use flow::{hamiltonian_flow, FlowOptions, Trajectory};
pub use point::{Coord, PhasePoint, SpinBlock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketBackend {
    CanonicalOnly,
    CanonicalPlusXiEta,
    CanonicalPlusKirillovF,
}

impl BracketBackend {
    pub fn needs_spin(self) -> bool {
        !matches!(self, BracketBackend::CanonicalOnly)
    }

    pub fn name(self) -> &'static str {
        match self {
            BracketBackend::CanonicalOnly => "canonical",
            BracketBackend::CanonicalPlusXiEta => "xi-eta",
            BracketBackend::CanonicalPlusKirillovF => "kirillov",
        }
    }
}

/// Overall sign of the Poisson structure.
///
/// `Direct`: `{p_i, q_j} = δ_ij`, `{ξ_i^a, η_j^b} = −δ_ij δ_ab` and the
/// half-symmetrized four-term bracket on `f`. `Reversed` negates all three.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    Direct,
    Reversed,
}

impl Convention {
    pub fn sign(self) -> f64 {
        match self {
            Convention::Direct => 1.0,
            Convention::Reversed => -1.0,
        }
    }

    pub fn flipped(self) -> Convention {
        match self {
            Convention::Direct => Convention::Reversed,
            Convention::Reversed => Convention::Direct,
        }
    }
}

/// Sparse Poisson tensor in the flat chart of a backend.
#[derive(Clone, Debug)]
pub struct PoissonStructure {
    pub backend: BracketBackend,
    pub dim: usize,
    pub triples: Vec<(usize, usize, f64)>,
}

impl PoissonStructure {
    pub fn new(x: &PhasePoint, backend: BracketBackend, convention: Convention) -> Result<Self> {
        let n = x.n();
        let eps = convention.sign();
        let mut t = Vec::new();
        for i in 0..n {
            t.push((n + i, i, eps));
            t.push((i, n + i, -eps));
        }
        let spin = if backend.needs_spin() {
            Some(x.spin().ok_or(Error::MissingSpin { backend })?)
        } else {
            None
        };
        let dim = match (backend, spin) {
            (BracketBackend::CanonicalOnly, _) => 2 * n,
            (BracketBackend::CanonicalPlusXiEta, Some(s)) => {
                let r = s.rank();
                let (xi0, eta0) = (2 * n, 2 * n + n * r);
                for k in 0..n * r {
                    t.push((xi0 + k, eta0 + k, -eps));
                    t.push((eta0 + k, xi0 + k, eps));
                }
                2 * n + 2 * n * r
            }
            (BracketBackend::CanonicalPlusKirillovF, Some(s)) => {
                let f0 = 2 * n;
                let idx = |i: usize, j: usize| f0 + i * n + j;
                let mut acc = std::collections::BTreeMap::<(usize, usize), f64>::new();
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let mut v = 0.0;
                                if i == l {
                                    v += s.f(j, k);
                                }
                                if k == i {
                                    v += s.f(l, j);
                                }
                                if j == k {
                                    v += s.f(i, l);
                                }
                                if l == j {
                                    v += s.f(k, i);
                                }
                                if v != 0.0 {
                                    *acc.entry((idx(i, j), idx(k, l))).or_insert(0.0) += 0.5 * eps * v;
                                }
                            }
                        }
                    }
                }
                t.extend(acc.into_iter().map(|((a, b), v)| (a, b, v)));
                2 * n + n * n
            }
            _ => unreachable!(),
        };
        Ok(PoissonStructure {
            backend,
            dim,
            triples: t,
        })
    }

    /// `{F, G} = Σ_{(a,b)} Π_ab ∂_a F ∂_b G` with a caller-supplied product.
    pub fn contract<A, B, R>(&self, ga: &[A], gb: &[B], mut pair: impl FnMut(f64, &A, &B) -> Option<R>) -> Vec<R> {
        let mut out = Vec::new();
        for &(a, b, c) in &self.triples {
            if let Some(v) = pair(c, &ga[a], &gb[b]) {
                out.push(v);
            }
        }
        out
    }
}

/// Gradient of an observable in the flat chart of `backend`.
pub fn flat_gradient<T: FieldValue>(
    partials: &Partials<T>,
    x: &PhasePoint,
    backend: BracketBackend,
) -> Result<Vec<T>> {
    let n = x.n();
    let zero = partials.dq[0].zero_like();
    let mut g: Vec<T> = partials.dq.iter().chain(&partials.dp).cloned().collect();
    match backend {
        BracketBackend::CanonicalOnly => {}
        BracketBackend::CanonicalPlusXiEta => {
            let s = x.spin().ok_or(Error::MissingSpin { backend })?;
            let r = s.rank();
            match &partials.spin {
                SpinPartials::None => g.extend(std::iter::repeat(zero).take(2 * n * r)),
                SpinPartials::XiEta { dxi, deta } => {
                    g.extend(dxi.iter().cloned());
                    g.extend(deta.iter().cloned());
                }
                SpinPartials::F(df) => {
                    // ∂/∂ξ_i^a = Σ_j ∂/∂f_ij η_j^a ;  ∂/∂η_j^a = Σ_i ∂/∂f_ij ξ_i^a
                    for i in 0..n {
                        for a in 0..r {
                            let mut acc = zero.clone();
                            for j in 0..n {
                                acc.scaled_add(C64::new(s.eta(j, a), 0.0), &df[i * n + j]);
                            }
                            g.push(acc);
                        }
                    }
                    for j in 0..n {
                        for a in 0..r {
                            let mut acc = zero.clone();
                            for i in 0..n {
                                acc.scaled_add(C64::new(s.xi(i, a), 0.0), &df[i * n + j]);
                            }
                            g.push(acc);
                        }
                    }
                }
            }
        }
        BracketBackend::CanonicalPlusKirillovF => {
            x.spin().ok_or(Error::MissingSpin { backend })?;
            match &partials.spin {
                SpinPartials::None => g.extend(std::iter::repeat(zero).take(n * n)),
                SpinPartials::F(df) => g.extend(df.iter().cloned()),
                SpinPartials::XiEta { .. } => {
                    return Err(Error::domain(
                        "flat_gradient",
                        "observable given in the xi-eta chart cannot be used with the Kirillov backend",
                    ))
                }
            }
        }
    }
    Ok(g)
}

/// `{F, G}` for scalar observables.
pub fn poisson_scalar(
    f: &ObservableField<C64>,
    g: &ObservableField<C64>,
    x: &PhasePoint,
    backend: BracketBackend,
    convention: Convention,
) -> Result<C64> {
    let ps = PoissonStructure::new(x, backend, convention)?;
    let ga = flat_gradient(&f.partials_for(x, backend)?, x, backend)?;
    let gb = flat_gradient(&g.partials_for(x, backend)?, x, backend)?;
    Ok(ps.contract(&ga, &gb, |c, a, b| Some(c * a * b)).into_iter().sum())
}

/// `{L₁, L₂}`: entry `[(i·n+k), (j·n+l)] = {L_ij, M_kl}` where `L` and `M`
/// are the two fields (typically one operator at two spectral arguments).
pub fn bracket_matrix(
    l: &ObservableField<CMatrix>,
    m: &ObservableField<CMatrix>,
    x: &PhasePoint,
    backend: BracketBackend,
    convention: Convention,
) -> Result<TensorOperator> {
    let ps = PoissonStructure::new(x, backend, convention)?;
    let ga = flat_gradient(&l.partials_for(x, backend)?, x, backend)?;
    let gb = flat_gradient(&m.partials_for(x, backend)?, x, backend)?;
    let n = ga[0].nrows();
    let mut out = TensorOperator::zeros(n);
    for &(a, b, c) in &ps.triples {
        let (da, db) = (&ga[a], &gb[b]);
        if da.iter().all(|z| *z == C64::new(0.0, 0.0)) || db.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            continue;
        }
        out.add_kron(C64::new(c, 0.0), da, db);
    }
    Ok(out)
}

/// Residual tables comparing the `ξη` bracket of `f` with two candidate forms.
#[derive(Clone, Debug)]
pub struct KirillovReport {
    /// `{f_ij, f_kl}` computed from the `ξη` bracket, indexed `[((i·n+j)·n+k)·n+l]`.
    pub bracket: Vec<f64>,
    /// Deviation from `δ_jk f_il − δ_il f_kj`.
    pub gl_residual: Vec<f64>,
    /// Deviation from `½(δ_il f_jk + δ_ki f_lj + δ_jk f_il + δ_lj f_ki)`.
    pub four_term_residual: Vec<f64>,
}

impl KirillovReport {
    pub fn gl_max(&self) -> f64 {
        self.gl_residual.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn four_term_max(&self) -> f64 {
        self.four_term_residual.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `{f_ij, f_kl}` under the `ξη` bracket (direct sign) against both candidate forms.
pub fn kirillov_consistency(spin: &SpinBlock) -> KirillovReport {
    let n = spin.n();
    let r = spin.rank();
    let mut bracket = Vec::with_capacity(n.pow(4));
    let mut gl = Vec::with_capacity(n.pow(4));
    let mut four = Vec::with_capacity(n.pow(4));
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    // ∂f_ij/∂ξ_m^a = δ_im η_j^a, ∂f_ij/∂η_m^a = δ_jm ξ_i^a,
                    // {F, G} = −Σ (∂_ξF ∂_ηG − ∂_ηF ∂_ξG)
                    let mut v = 0.0;
                    for a in 0..r {
                        v -= d(i, l) * spin.eta(j, a) * spin.xi(k, a);
                        v += d(j, k) * spin.xi(i, a) * spin.eta(l, a);
                    }
                    bracket.push(v);
                    gl.push(v - (d(j, k) * spin.f(i, l) - d(i, l) * spin.f(k, j)));
                    let kir = 0.5
                        * (d(i, l) * spin.f(j, k)
                            + d(k, i) * spin.f(l, j)
                            + d(j, k) * spin.f(i, l)
                            + d(l, j) * spin.f(k, i));
                    four.push(v - kir);
                }
            }
        }
    }
    KirillovReport {
        bracket,
        gl_residual: gl,
        four_term_residual: four,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn coord_field(c: Coord) -> ObservableField<C64> {
        ObservableField::fd(Arc::new(move |x: &PhasePoint| Ok(C64::new(x.coord(c), 0.0))))
    }

    #[test]
    fn canonical_pairs() {
        let x = PhasePoint::new(vec![0.4, -0.2], vec![1.0, 2.0]).unwrap();
        let b = BracketBackend::CanonicalOnly;
        let p1 = coord_field(Coord::P(0));
        let q1 = coord_field(Coord::Q(0));
        let q2 = coord_field(Coord::Q(1));
        let v = poisson_scalar(&p1, &q1, &x, b, Convention::Direct).unwrap();
        assert!((v - 1.0).norm() < 1e-9);
        let v = poisson_scalar(&p1, &q1, &x, b, Convention::Reversed).unwrap();
        assert!((v + 1.0).norm() < 1e-9);
        assert!(poisson_scalar(&q1, &q2, &x, b, Convention::Direct).unwrap().norm() < 1e-12);
    }

    #[test]
    fn spin_pairs() {
        let s = SpinBlock::new(2, 1, vec![0.3, -0.5], vec![0.7, 0.2]).unwrap();
        let x = PhasePoint::with_spin(vec![1.0, 0.0], vec![0.0, 0.0], Some(s)).unwrap();
        let xi = coord_field(Coord::Xi(0, 0));
        let eta = coord_field(Coord::Eta(0, 0));
        let v = poisson_scalar(&xi, &eta, &x, BracketBackend::CanonicalPlusXiEta, Convention::Direct).unwrap();
        assert!((v + 1.0).norm() < 1e-9);
        let f12 = coord_field(Coord::F(0, 1));
        let f21 = coord_field(Coord::F(1, 0));
        let k = poisson_scalar(&f12, &f21, &x, BracketBackend::CanonicalPlusKirillovF, Convention::Direct).unwrap();
        // ½(f_22 + f_11)
        let expected = 0.5 * (x.f(0, 0) + x.f(1, 1));
        assert!((k - expected).norm() < 1e-9);
        let missing = PhasePoint::new(vec![1.0], vec![0.0]).unwrap();
        let r = PoissonStructure::new(&missing, BracketBackend::CanonicalPlusKirillovF, Convention::Direct);
        assert!(matches!(r, Err(Error::MissingSpin { .. })));
    }

    #[test]
    fn kirillov_hand_case() {
        let s = SpinBlock::new(2, 1, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let rep = kirillov_consistency(&s);
        // {f_12, f_21} = f_11 − f_22 = 0
        let idx = |i: usize, j: usize, k: usize, l: usize| ((i * 2 + j) * 2 + k) * 2 + l;
        assert_eq!(rep.bracket[idx(0, 1, 1, 0)], 0.0);
        assert!(rep.gl_max() < 1e-15);
    }
}
