//! Dense complex matrices and two- and three-site tensor products.
//!
//! Index convention: `e_ij ⊗ e_kl` sits at row `i·n + k`, column `j·n + l`
//! (zero-based). Three-site products extend this to `(i·n + k)·n + m`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Elementary matrix `e_ij`.
pub fn unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diag(values: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

pub fn comm(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn fnorm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMatrix) -> C64 {
    a.trace()
}

fn check_square(a: &CMatrix, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "{what}: expected a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// Eigenvalues sorted by `(Re, Im)`.
pub fn eigvals(a: &CMatrix) -> Result<Vec<C64>> {
    let n = check_square(a, "eigvals")?;
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::Dimension("eigvals: non-finite entry".into()));
    }
    let schur = a
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(Error::Eigen(n))?;
    let (_, t) = schur.unpack();
    let mut ev: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(ev)
}

/// Largest distance between two spectra under an optimal one-to-one matching.
///
/// Exhaustive over permutations for up to 8 eigenvalues; above that a greedy
/// match on the sorted order is used.
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra of different sizes");
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    if n > 8 {
        return a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let d = (0..n).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max);
        best = best.min(d);
    });
    best
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// Operator on `Cⁿ ⊗ Cⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorOperator {
    n: usize,
    mat: CMatrix,
}

impl TensorOperator {
    pub fn zeros(n: usize) -> Self {
        TensorOperator {
            n,
            mat: CMatrix::zeros(n * n, n * n),
        }
    }

    pub fn identity(n: usize) -> Self {
        TensorOperator {
            n,
            mat: CMatrix::identity(n * n, n * n),
        }
    }

    pub fn from_matrix(n: usize, mat: CMatrix) -> Result<Self> {
        if mat.nrows() != n * n || mat.ncols() != n * n {
            return Err(Error::Dimension(format!(
                "tensor operator on site dimension {n} needs {0}x{0}, got {1}x{2}",
                n * n,
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(TensorOperator { n, mat })
    }

    pub fn site_dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Coefficient of `e_ij ⊗ e_kl`.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.mat[(i * self.n + k, j * self.n + l)]
    }

    pub fn add_at(&mut self, i: usize, j: usize, k: usize, l: usize, v: C64) {
        let n = self.n;
        self.mat[(i * n + k, j * n + l)] += v;
    }

    /// Add `c · A ⊗ B`.
    pub fn add_kron(&mut self, c: C64, a: &CMatrix, b: &CMatrix) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let aij = a[(i, j)] * c;
                if aij == ZERO {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        let bkl = b[(k, l)];
                        if bkl != ZERO {
                            self.mat[(i * n + k, j * n + l)] += aij * bkl;
                        }
                    }
                }
            }
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        TensorOperator {
            n: self.n,
            mat: &self.mat * c,
        }
    }

    pub fn fnorm(&self) -> f64 {
        fnorm(&self.mat)
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn comm(&self, other: &TensorOperator) -> TensorOperator {
        TensorOperator {
            n: self.n,
            mat: &self.mat * &other.mat - &other.mat * &self.mat,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.mat.iter().all(|z| z.is_finite())
    }

    /// `Tr₁`: the site-2 operator `Σ_i T[(i,k),(i,l)]`.
    pub fn partial_trace1(&self) -> CMatrix {
        let n = self.n;
        CMatrix::from_fn(n, n, |k, l| (0..n).map(|i| self.mat[(i * n + k, i * n + l)]).sum())
    }

    /// `Tr₂`: the site-1 operator `Σ_k T[(i,k),(j,k)]`.
    pub fn partial_trace2(&self) -> CMatrix {
        let n = self.n;
        CMatrix::from_fn(n, n, |i, j| (0..n).map(|k| self.mat[(i * n + k, j * n + k)]).sum())
    }
}

impl Add for &TensorOperator {
    type Output = TensorOperator;
    fn add(self, rhs: &TensorOperator) -> TensorOperator {
        TensorOperator {
            n: self.n,
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &TensorOperator {
    type Output = TensorOperator;
    fn sub(self, rhs: &TensorOperator) -> TensorOperator {
        TensorOperator {
            n: self.n,
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Mul for &TensorOperator {
    type Output = TensorOperator;
    fn mul(self, rhs: &TensorOperator) -> TensorOperator {
        TensorOperator {
            n: self.n,
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl Neg for &TensorOperator {
    type Output = TensorOperator;
    fn neg(self) -> TensorOperator {
        TensorOperator {
            n: self.n,
            mat: -&self.mat,
        }
    }
}

impl Add for TensorOperator {
    type Output = TensorOperator;
    fn add(self, rhs: TensorOperator) -> TensorOperator {
        &self + &rhs
    }
}

impl Sub for TensorOperator {
    type Output = TensorOperator;
    fn sub(self, rhs: TensorOperator) -> TensorOperator {
        &self - &rhs
    }
}

impl Mul for TensorOperator {
    type Output = TensorOperator;
    fn mul(self, rhs: TensorOperator) -> TensorOperator {
        &self * &rhs
    }
}

impl AddAssign<&TensorOperator> for TensorOperator {
    fn add_assign(&mut self, rhs: &TensorOperator) {
        self.mat += &rhs.mat;
    }
}

impl SubAssign<&TensorOperator> for TensorOperator {
    fn sub_assign(&mut self, rhs: &TensorOperator) {
        self.mat -= &rhs.mat;
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<TensorOperator> {
    let n = check_square(a, "kron")?;
    if check_square(b, "kron")? != n {
        return Err(Error::Dimension(format!(
            "kron: site dimensions differ ({n} vs {})",
            b.nrows()
        )));
    }
    let mut t = TensorOperator::zeros(n);
    t.add_kron(ONE, a, b);
    Ok(t)
}

/// `L ⊗ 1`.
pub fn embed1(l: &CMatrix) -> Result<TensorOperator> {
    kron(l, &identity(l.nrows()))
}

/// `1 ⊗ L`.
pub fn embed2(l: &CMatrix) -> Result<TensorOperator> {
    kron(&identity(l.nrows()), l)
}

/// The permutation `P = Σ e_ij ⊗ e_ji`.
pub fn swap(n: usize) -> TensorOperator {
    let mut t = TensorOperator::zeros(n);
    for i in 0..n {
        for j in 0..n {
            t.add_at(i, j, j, i, ONE);
        }
    }
    t
}

/// `P T P`: exchanges the two sites.
pub fn transpose_sites(t: &TensorOperator) -> TensorOperator {
    let n = t.n;
    let mut out = TensorOperator::zeros(n);
    for r in 0..n * n {
        for c in 0..n * n {
            let (i, k) = (r / n, r % n);
            let (j, l) = (c / n, c % n);
            out.mat[(k * n + i, l * n + j)] = t.mat[(r, c)];
        }
    }
    out
}

/// Embed a two-site operator on sites `(a, b)` of a three-site product.
/// `a` and `b` are distinct zero-based site indices; `(b, a)` places the
/// first tensor factor on site `b`.
pub fn embed_pair(t: &TensorOperator, a: usize, b: usize) -> CMatrix {
    assert!(a < 3 && b < 3 && a != b, "invalid site pair ({a}, {b})");
    let n = t.n;
    let c = 3 - a - b;
    let mut out = CMatrix::zeros(n * n * n, n * n * n);
    let flat = |idx: [usize; 3]| (idx[0] * n + idx[1]) * n + idx[2];
    for r in 0..n * n {
        for col in 0..n * n {
            let v = t.mat[(r, col)];
            if v == ZERO {
                continue;
            }
            let (i, k) = (r / n, r % n);
            let (j, l) = (col / n, col % n);
            for m in 0..n {
                let mut ri = [0; 3];
                let mut ci = [0; 3];
                ri[a] = i;
                ci[a] = j;
                ri[b] = k;
                ci[b] = l;
                ri[c] = m;
                ci[c] = m;
                out[(flat(ri), flat(ci))] += v;
            }
        }
    }
    out
}

/// Embed a single-site operator on site `a` of a three-site product.
pub fn embed_single(x: &CMatrix, a: usize) -> CMatrix {
    let n = x.nrows();
    let id = identity(n);
    let mats = [
        if a == 0 { x } else { &id },
        if a == 1 { x } else { &id },
        if a == 2 { x } else { &id },
    ];
    mats[0].kronecker(mats[1]).kronecker(mats[2])
}
