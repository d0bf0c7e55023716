use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spin variables `ξ, η` (both `N × r`, row-major) with `f_ij = Σ_a ξ_i^a η_j^a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpinRaw")]
pub struct SpinBlock {
    n: usize,
    r: usize,
    xi: Vec<f64>,
    eta: Vec<f64>,
    #[serde(skip)]
    f: Vec<f64>,
}

impl SpinBlock {
    pub fn new(n: usize, r: usize, xi: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if r == 0 {
            return Err(Error::Dimension("spin rank r must be at least 1".into()));
        }
        if xi.len() != n * r || eta.len() != n * r {
            return Err(Error::Dimension(format!(
                "spin block needs {n}x{r} entries for xi and eta, got {} and {}",
                xi.len(),
                eta.len()
            )));
        }
        if xi.iter().chain(&eta).any(|v| !v.is_finite()) {
            return Err(Error::Dimension("spin block has non-finite entries".into()));
        }
        let f = product(n, r, &xi, &eta);
        Ok(SpinBlock { n, r, xi, eta, f })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn xi(&self, i: usize, a: usize) -> f64 {
        self.xi[i * self.r + a]
    }

    pub fn eta(&self, i: usize, a: usize) -> f64 {
        self.eta[i * self.r + a]
    }

    pub fn xi_flat(&self) -> &[f64] {
        &self.xi
    }

    pub fn eta_flat(&self) -> &[f64] {
        &self.eta
    }

    pub fn f(&self, i: usize, j: usize) -> f64 {
        self.f[i * self.n + j]
    }

    pub fn f_flat(&self) -> &[f64] {
        &self.f
    }

    /// Same block with `f` moved off the `ξη` image; used by the Kirillov
    /// chart, where `f` is a coordinate in its own right.
    pub(crate) fn with_f(&self, f: Vec<f64>) -> SpinBlock {
        debug_assert_eq!(f.len(), self.n * self.n);
        SpinBlock { f, ..self.clone() }
    }

    fn refresh(&mut self) {
        self.f = product(self.n, self.r, &self.xi, &self.eta);
    }
}

fn product(n: usize, r: usize, xi: &[f64], eta: &[f64]) -> Vec<f64> {
    let mut f = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            f[i * n + j] = (0..r).map(|a| xi[i * r + a] * eta[j * r + a]).sum();
        }
    }
    f
}

/// A point of phase space: positions, momenta (rapidities for RS) and an
/// optional spin block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    q: Vec<f64>,
    p: Vec<f64>,
    spin: Option<SpinBlock>,
}

/// A single coordinate of a [`PhasePoint`] in one of the charts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coord {
    Q(usize),
    P(usize),
    Xi(usize, usize),
    Eta(usize, usize),
    F(usize, usize),
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        Self::with_spin(q, p, None)
    }

    pub fn with_spin(q: Vec<f64>, p: Vec<f64>, spin: Option<SpinBlock>) -> Result<Self> {
        if q.len() != p.len() || q.is_empty() {
            return Err(Error::Dimension(format!(
                "positions and momenta must have equal non-zero length ({} vs {})",
                q.len(),
                p.len()
            )));
        }
        if q.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::Dimension("phase point has non-finite entries".into()));
        }
        if let Some(s) = &spin {
            if s.n() != q.len() {
                return Err(Error::Dimension(format!(
                    "spin block is for {} particles, point has {}",
                    s.n(),
                    q.len()
                )));
            }
        }
        Ok(PhasePoint { q, p, spin })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn spin(&self) -> Option<&SpinBlock> {
        self.spin.as_ref()
    }

    /// `f_ij`, or zero without a spin block.
    pub fn f(&self, i: usize, j: usize) -> f64 {
        self.spin.as_ref().map_or(0.0, |s| s.f(i, j))
    }

    pub fn coord(&self, c: Coord) -> f64 {
        match c {
            Coord::Q(i) => self.q[i],
            Coord::P(i) => self.p[i],
            Coord::Xi(i, a) => self.spin.as_ref().map_or(0.0, |s| s.xi(i, a)),
            Coord::Eta(i, a) => self.spin.as_ref().map_or(0.0, |s| s.eta(i, a)),
            Coord::F(i, j) => self.f(i, j),
        }
    }

    /// Copy with one coordinate shifted by `h`. Shifting `ξ` or `η`
    /// recomputes `f`; shifting `f` leaves `ξ, η` alone.
    pub(crate) fn shifted(&self, c: Coord, h: f64) -> PhasePoint {
        let mut out = self.clone();
        match c {
            Coord::Q(i) => out.q[i] += h,
            Coord::P(i) => out.p[i] += h,
            Coord::Xi(i, a) => {
                let s = out.spin.as_mut().expect("spin coordinate without spin block");
                s.xi[i * s.r + a] += h;
                s.refresh();
            }
            Coord::Eta(i, a) => {
                let s = out.spin.as_mut().expect("spin coordinate without spin block");
                s.eta[i * s.r + a] += h;
                s.refresh();
            }
            Coord::F(i, j) => {
                let s = out.spin.as_mut().expect("spin coordinate without spin block");
                let n = s.n;
                s.f[i * n + j] += h;
            }
        }
        out
    }

    pub(crate) fn set_q(&mut self, q: Vec<f64>) {
        self.q = q;
    }

    pub(crate) fn set_p(&mut self, p: Vec<f64>) {
        self.p = p;
    }

    pub(crate) fn set_spin(&mut self, spin: Option<SpinBlock>) {
        self.spin = spin;
    }

    /// Smallest gap `q_i − q_{i+1}` between neighbours in the given order.
    pub fn min_gap(&self) -> f64 {
        self.q
            .windows(2)
            .map(|w| (w[0] - w[1]).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Deserialize)]
struct SpinRaw {
    n: usize,
    r: usize,
    xi: Vec<f64>,
    eta: Vec<f64>,
}

impl TryFrom<SpinRaw> for SpinBlock {
    type Error = Error;

    fn try_from(raw: SpinRaw) -> Result<Self> {
        SpinBlock::new(raw.n, raw.r, raw.xi, raw.eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_is_recomputed() {
        let s = SpinBlock::new(2, 1, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(s.f_flat(), &[0.0, 1.0, 0.0, 0.0]);
        let x = PhasePoint::with_spin(vec![1.0, 0.0], vec![0.0, 0.0], Some(s)).unwrap();
        let y = x.shifted(Coord::Xi(1, 0), 2.0);
        assert_eq!(y.f(1, 1), 2.0);
        let z = x.shifted(Coord::F(0, 0), 0.5);
        assert_eq!(z.f(0, 0), 0.5);
        assert_eq!(z.spin().unwrap().xi_flat(), &[1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(PhasePoint::new(vec![1.0], vec![]).is_err());
        assert!(PhasePoint::new(vec![f64::NAN], vec![0.0]).is_err());
        assert!(SpinBlock::new(2, 0, vec![], vec![]).is_err());
        let s = SpinBlock::new(1, 1, vec![1.0], vec![1.0]).unwrap();
        assert!(PhasePoint::with_spin(vec![1.0, 2.0], vec![0.0, 0.0], Some(s)).is_err());
    }
}
