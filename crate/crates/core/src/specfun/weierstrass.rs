//! Weierstrass σ, ζ, ℘ on a general lattice `2ω₁ℤ + 2ω₂ℤ`.
//!
//! Evaluation goes through nome expansions (`q = exp(iπτ)`, `τ = ω₂/ω₁`):
//! the odd Jacobi theta series for σ and Lambert series for ζ, ℘ and ℘′.
//! These series are periodic in the `ω₁` direction, so only the `ω₂`
//! coordinate of the argument is reduced before summation; this keeps
//! `|Im v| ≤ π Im τ / 2` and the terms decay at least like `|q|ⁿ`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice-distance guard for ζ, ℘, ℘′ and Φ.
pub const POLE_GUARD: f64 = 1e-8;
/// Hard cap on the number of series terms.
pub const SERIES_CAP: usize = 256;
/// Relative size of the last accepted term.
pub const SERIES_RTOL: f64 = 1e-16;
/// Largest real exponent accepted in the quasi-periodic factor of σ.
const MAX_EXPONENT: f64 = 700.0;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Half-periods of a Weierstrass lattice together with the derived constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HalfPeriods", into = "HalfPeriods")]
pub struct EllipticParams {
    omega1: C64,
    omega2: C64,
    tau: C64,
    nome: C64,
    eta1: C64,
    eta2: C64,
}

/// Wire form of [`EllipticParams`]: complex numbers as `[re, im]` pairs.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HalfPeriods {
    pub omega1: [f64; 2],
    pub omega2: [f64; 2],
}

impl TryFrom<HalfPeriods> for EllipticParams {
    type Error = Error;

    fn try_from(h: HalfPeriods) -> Result<Self> {
        EllipticParams::new(
            C64::new(h.omega1[0], h.omega1[1]),
            C64::new(h.omega2[0], h.omega2[1]),
        )
    }
}

impl From<EllipticParams> for HalfPeriods {
    fn from(p: EllipticParams) -> Self {
        HalfPeriods {
            omega1: [p.omega1.re, p.omega1.im],
            omega2: [p.omega2.re, p.omega2.im],
        }
    }
}

impl EllipticParams {
    pub fn new(omega1: C64, omega2: C64) -> Result<Self> {
        if !(omega1.norm() > 0.0) || !omega1.is_finite() || !omega2.is_finite() {
            return Err(Error::InvalidParams(format!(
                "half-periods must be finite with omega1 != 0 (got {omega1}, {omega2})"
            )));
        }
        let tau = omega2 / omega1;
        if !(tau.im > 0.0) {
            return Err(Error::InvalidParams(format!(
                "Im(omega2/omega1) must be positive (tau = {tau})"
            )));
        }
        let nome = (I * PI * tau).exp();
        let q2 = nome * nome;

        // η₁ = π²/(12ω₁) · E₂(τ),  E₂ = 1 − 24 Σ n q²ⁿ/(1 − q²ⁿ)
        let mut e2 = C64::new(1.0, 0.0);
        let mut q2n = C64::new(1.0, 0.0);
        let mut converged = false;
        let mut last = f64::INFINITY;
        for n in 1..=SERIES_CAP {
            q2n *= q2;
            let term = -24.0 * (n as f64) * q2n / (1.0 - q2n);
            e2 += term;
            last = term.norm();
            if last <= SERIES_RTOL * e2.norm() {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Accuracy {
                function: "eta1",
                cap: SERIES_CAP,
                last,
            });
        }
        let eta1 = PI * PI / (12.0 * omega1) * e2;
        // Legendre relation η₁ω₂ − η₂ω₁ = iπ/2
        let eta2 = (eta1 * omega2 - I * PI / 2.0) / omega1;
        Ok(EllipticParams {
            omega1,
            omega2,
            tau,
            nome,
            eta1,
            eta2,
        })
    }

    /// Rectangular lattice with real `ω₁` and imaginary `ω₂ = i·im2`.
    pub fn rectangular(omega1: f64, im2: f64) -> Result<Self> {
        Self::new(C64::new(omega1, 0.0), C64::new(0.0, im2))
    }

    pub fn omega1(&self) -> C64 {
        self.omega1
    }

    pub fn omega2(&self) -> C64 {
        self.omega2
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    pub fn nome(&self) -> C64 {
        self.nome
    }

    /// `η₁ = ζ(ω₁)`.
    pub fn eta1(&self) -> C64 {
        self.eta1
    }

    /// `η₂ = ζ(ω₂)`.
    pub fn eta2(&self) -> C64 {
        self.eta2
    }

    /// η₁ recomputed from the ratio `−π²/(12ω₁)·θ₁‴(0)/θ₁′(0)` of theta series.
    ///
    /// Independent of the Eisenstein series used at construction; the two
    /// must agree to rounding.
    pub fn eta1_from_theta(&self) -> Result<C64> {
        let q = self.nome;
        let mut d1 = C64::new(0.0, 0.0);
        let mut d3 = C64::new(0.0, 0.0);
        let mut last = f64::INFINITY;
        for n in 0..SERIES_CAP {
            let k = (2 * n + 1) as f64;
            let w = sign(n) * q.powu((n * (n + 1)) as u32);
            d1 += w * k;
            d3 -= w * k * k * k;
            last = (w * k * k * k).norm();
            if last <= SERIES_RTOL * d3.norm() && n > 0 {
                return Ok(-PI * PI / (12.0 * self.omega1) * d3 / d1);
            }
        }
        Err(Error::Accuracy {
            function: "eta1_from_theta",
            cap: SERIES_CAP,
            last,
        })
    }

    /// Real lattice coordinates `(a, b)` with `z = 2aω₁ + 2bω₂`.
    fn lattice_coords(&self, z: C64) -> (f64, f64) {
        let w1 = 2.0 * self.omega1;
        let w2 = 2.0 * self.omega2;
        let det = w1.re * w2.im - w1.im * w2.re;
        let a = (z.re * w2.im - z.im * w2.re) / det;
        let b = (w1.re * z.im - w1.im * z.re) / det;
        (a, b)
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn lattice_distance(&self, z: C64) -> f64 {
        let (a, b) = self.lattice_coords(z);
        let (m0, n0) = (a.round(), b.round());
        let mut best = f64::INFINITY;
        for dm in -1..=1 {
            for dn in -1..=1 {
                let w = 2.0 * (m0 + dm as f64) * self.omega1 + 2.0 * (n0 + dn as f64) * self.omega2;
                best = best.min((z - w).norm());
            }
        }
        best
    }

    fn guard(&self, function: &'static str, z: C64) -> Result<()> {
        let d = self.lattice_distance(z);
        if d < POLE_GUARD || !d.is_finite() {
            return Err(Error::PoleProximity {
                function,
                arg: format!("{z}"),
                distance: d,
                guard: POLE_GUARD,
            });
        }
        Ok(())
    }

    /// Shift `z` by a multiple of `2ω₂` so that its `ω₂`-coordinate is in `[-½, ½]`.
    fn reduce_omega2(&self, z: C64) -> (C64, f64) {
        let (_, b) = self.lattice_coords(z);
        let n = b.round();
        (z - 2.0 * n * self.omega2, n)
    }

    fn scale(&self) -> C64 {
        PI / (2.0 * self.omega1)
    }

    /// Lambert sum `Σ_{n≥1} c(n) · q²ⁿ/(1 − q²ⁿ) · g(n)` with termination on
    /// two consecutive negligible terms.
    fn lambert<F>(&self, function: &'static str, leading: C64, mut g: F) -> Result<C64>
    where
        F: FnMut(usize) -> C64,
    {
        let q2 = self.nome * self.nome;
        let mut q2n = C64::new(1.0, 0.0);
        let mut sum = C64::new(0.0, 0.0);
        let mut small = 0;
        let mut last = f64::INFINITY;
        for n in 1..=SERIES_CAP {
            q2n *= q2;
            let term = q2n / (1.0 - q2n) * g(n);
            sum += term;
            last = term.norm();
            let reference = sum.norm().max(leading.norm());
            if last <= SERIES_RTOL * reference || q2n.norm() == 0.0 {
                small += 1;
                if small >= 2 {
                    return Ok(sum);
                }
            } else {
                small = 0;
            }
        }
        Err(Error::Accuracy {
            function,
            cap: SERIES_CAP,
            last,
        })
    }

    /// Weierstrass σ. Entire; no pole guard.
    pub fn sigma(&self, z: C64) -> Result<C64> {
        let (z0, n) = self.reduce_omega2(z);
        let v = self.scale() * z0;
        let q = self.nome;
        // S(v) = Σ (−1)ⁿ q^{n(n+1)} sin((2n+1)v), S′(0) = Σ (−1)ⁿ q^{n(n+1)} (2n+1)
        let mut s = C64::new(0.0, 0.0);
        let mut ds = C64::new(0.0, 0.0);
        let mut last = f64::INFINITY;
        let mut done = false;
        for k in 0..SERIES_CAP {
            let w = sign(k) * q.powu((k * (k + 1)) as u32);
            let m = (2 * k + 1) as f64;
            let term = w * (m * v).sin();
            s += term;
            ds += w * m;
            last = term.norm().max((w * m).norm() * 1e-300);
            if k > 0 && term.norm() <= SERIES_RTOL * s.norm() && (w * m).norm() <= SERIES_RTOL * ds.norm() {
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::Accuracy {
                function: "sigma",
                cap: SERIES_CAP,
                last,
            });
        }
        let gauss = self.eta1 * z0 * z0 / (2.0 * self.omega1);
        // σ(z0 + 2nω₂) = (−1)ⁿ exp(2nη₂(z0 + nω₂)) σ(z0)
        let shift = 2.0 * n * self.eta2 * (z0 + n * self.omega2);
        let exponent = gauss + shift;
        if exponent.re.abs() > MAX_EXPONENT {
            return Err(Error::Overflow {
                function: "sigma",
                exponent: exponent.re,
            });
        }
        let parity = if (n as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        Ok(parity * (2.0 * self.omega1 / PI) * exponent.exp() * s / ds)
    }

    /// Weierstrass ζ = σ′/σ.
    pub fn zeta(&self, z: C64) -> Result<C64> {
        self.guard("zeta", z)?;
        let (z0, n) = self.reduce_omega2(z);
        let c = self.scale();
        let v = c * z0;
        let lead = c * v.cos() / v.sin();
        let series = self.lambert("zeta", lead, |k| (2.0 * k as f64 * v).sin())?;
        Ok(self.eta1 * z0 / self.omega1 + lead + 4.0 * c * series + 2.0 * n * self.eta2)
    }

    /// Weierstrass ℘ = −ζ′.
    pub fn wp(&self, z: C64) -> Result<C64> {
        self.guard("wp", z)?;
        let (z0, _) = self.reduce_omega2(z);
        let c = self.scale();
        let v = c * z0;
        let s = v.sin();
        let lead = c * c / (s * s);
        let series = self.lambert("wp", lead, |k| k as f64 * (2.0 * k as f64 * v).cos())?;
        Ok(-self.eta1 / self.omega1 + lead - 8.0 * c * c * series)
    }

    /// ℘′.
    pub fn wp_prime(&self, z: C64) -> Result<C64> {
        self.guard("wp_prime", z)?;
        let (z0, _) = self.reduce_omega2(z);
        let c = self.scale();
        let v = c * z0;
        let s = v.sin();
        let lead = -2.0 * c * c * c * v.cos() / (s * s * s);
        let series = self.lambert("wp_prime", lead, |k| {
            let kf = k as f64;
            kf * kf * (2.0 * kf * v).sin()
        })?;
        Ok(lead + 16.0 * c * c * c * series)
    }

    /// `Φ(x, λ) = σ(x+λ) / (σ(x) σ(λ))`.
    pub fn phi(&self, x: C64, lambda: C64) -> Result<C64> {
        self.guard("phi", x)?;
        self.guard("phi", lambda)?;
        self.guard("phi", x + lambda)?;
        Ok(self.sigma(x + lambda)? / (self.sigma(x)? * self.sigma(lambda)?))
    }

    /// `∂Φ/∂x = Φ(x, λ) (ζ(x+λ) − ζ(x))`.
    pub fn phi_dx(&self, x: C64, lambda: C64) -> Result<C64> {
        Ok(self.phi(x, lambda)? * (self.zeta(x + lambda)? - self.zeta(x)?))
    }

    /// The Calogero-Moser kernel `l(x, λ) = −Φ(x, λ)`.
    pub fn l(&self, x: C64, lambda: C64) -> Result<C64> {
        Ok(-self.phi(x, lambda)?)
    }

    /// Lattice invariants `(g₂, g₃)` from the Eisenstein-type q-series.
    pub fn invariants(&self) -> Result<(C64, C64)> {
        // g₂ = (π/ω₁)⁴ / 12 · E₄,  g₃ = (π/ω₁)⁶ / 216 · E₆
        let c = PI / self.omega1;
        let e4 = C64::new(1.0, 0.0)
            + 240.0 * self.lambert("invariants", C64::new(1.0, 0.0), |k| C64::new((k as f64).powi(3), 0.0))?;
        let e6 = C64::new(1.0, 0.0)
            - 504.0 * self.lambert("invariants", C64::new(1.0, 0.0), |k| C64::new((k as f64).powi(5), 0.0))?;
        Ok((c.powu(4) / 12.0 * e4, c.powu(6) / 216.0 * e6))
    }
}

fn sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> EllipticParams {
        EllipticParams::rectangular(1.0, 1.0).unwrap()
    }

    fn close(a: C64, b: C64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm().max(1.0)
    }

    #[test]
    fn rejects_degenerate_lattices() {
        assert!(EllipticParams::new(C64::new(0.0, 0.0), C64::new(0.0, 1.0)).is_err());
        assert!(EllipticParams::new(C64::new(1.0, 0.0), C64::new(2.0, 0.0)).is_err());
        assert!(EllipticParams::new(C64::new(1.0, 0.0), C64::new(0.0, -1.0)).is_err());
    }

    #[test]
    fn sigma_near_origin() {
        let p = params();
        let z = C64::new(1e-6, 0.0);
        let s = p.sigma(z).unwrap();
        assert!((s / z - 1.0).norm() < 1e-12);
    }

    #[test]
    fn parity() {
        let p = params();
        let z = C64::new(0.3, 0.1);
        assert!(close(p.sigma(-z).unwrap(), -p.sigma(z).unwrap(), 1e-14));
        let z = C64::new(0.2, 0.05);
        assert!((p.zeta(z).unwrap() + p.zeta(-z).unwrap()).norm() < 1e-12);
        let z = C64::new(0.37, 0.11);
        assert!(close(p.wp(-z).unwrap(), p.wp(z).unwrap(), 1e-13));
    }

    #[test]
    fn zeta_laurent() {
        let p = params();
        let z = C64::new(1e-3, 0.0);
        assert!((p.zeta(z).unwrap() - 1.0 / z).norm() < 1e-6);
    }

    #[test]
    fn wp_is_minus_zeta_derivative() {
        let p = params();
        let z = C64::new(0.37, 0.11);
        let h = 1e-5;
        let fd = -(p.zeta(z + h).unwrap() - p.zeta(z - h).unwrap()) / (2.0 * h);
        assert!(close(fd, p.wp(z).unwrap(), 1e-8));
    }

    #[test]
    fn wp_prime_satisfies_cubic() {
        let p = EllipticParams::new(C64::new(1.0, 0.2), C64::new(0.3, 1.1)).unwrap();
        let (g2, g3) = p.invariants().unwrap();
        for z in [C64::new(0.3, 0.2), C64::new(-0.7, 0.4), C64::new(0.1, -0.5)] {
            let w = p.wp(z).unwrap();
            let dw = p.wp_prime(z).unwrap();
            let rhs = 4.0 * w * w * w - g2 * w - g3;
            assert!(close(dw * dw, rhs, 1e-10), "{z}: {} vs {}", dw * dw, rhs);
        }
    }

    #[test]
    fn eta1_two_routes() {
        for p in [
            params(),
            EllipticParams::new(C64::new(1.0, 0.2), C64::new(0.3, 1.1)).unwrap(),
        ] {
            let a = p.eta1();
            let b = p.eta1_from_theta().unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm());
        }
    }

    #[test]
    fn pole_guard() {
        let p = params();
        let w = 2.0 * p.omega1() + 2.0 * p.omega2();
        assert!(matches!(p.zeta(w), Err(Error::PoleProximity { .. })));
        assert!(matches!(p.wp(C64::new(1e-9, 0.0)), Err(Error::PoleProximity { .. })));
        assert!(matches!(
            p.phi(C64::new(0.3, 0.0), C64::new(-0.3, 0.0)),
            Err(Error::PoleProximity { .. })
        ));
        assert!(p.sigma(w).unwrap().norm() < 1e-10);
    }

    #[test]
    fn sigma_overflow_is_reported() {
        let p = params();
        let z = C64::new(0.1, 60.0);
        assert!(matches!(p.sigma(z), Err(Error::Overflow { .. })));
    }

    #[test]
    fn serde_roundtrip_recomputes_constants() {
        let p = EllipticParams::new(C64::new(1.0, 0.2), C64::new(0.3, 1.1)).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let back: EllipticParams = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
    }
}
