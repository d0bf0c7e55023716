use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::weierstrass::{EllipticParams, POLE_GUARD};
use crate::error::{Error, Result};
use crate::models::{RsCoupling, RsParams};

/// Potential family: rational, hyperbolic with scale `ν`, or elliptic.
///
/// The hyperbolic kernels are written in the scale-covariant form
/// `(ν/2)/sinh(νx/2)`, so `ν = 2` gives the unit forms `1/sinh x`, `coth x`
/// and `1/sinh² x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionFamily {
    Rational,
    Hyperbolic { nu: f64 },
    Elliptic(EllipticParams),
}

/// A spectral argument. `Infinite` selects the spectral-free limit of the
/// degenerate families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Spectral {
    Finite(C64),
    Infinite,
}

impl Spectral {
    pub fn finite(self) -> Option<C64> {
        match self {
            Spectral::Finite(z) => Some(z),
            Spectral::Infinite => None,
        }
    }

    /// `λ − μ`, defined when both are finite.
    pub fn difference(self, other: Spectral) -> Option<C64> {
        match (self, other) {
            (Spectral::Finite(a), Spectral::Finite(b)) => Some(a - b),
            _ => None,
        }
    }
}

impl From<C64> for Spectral {
    fn from(z: C64) -> Self {
        Spectral::Finite(z)
    }
}

fn nonzero(function: &'static str, what: &str, z: C64) -> Result<C64> {
    if z.norm() < POLE_GUARD || !z.is_finite() {
        return Err(Error::PoleProximity {
            function,
            arg: format!("{what} = {z}"),
            distance: z.norm(),
            guard: POLE_GUARD,
        });
    }
    Ok(z)
}

impl FunctionFamily {
    pub fn hyperbolic(nu: f64) -> Result<Self> {
        let f = FunctionFamily::Hyperbolic { nu };
        f.validate()?;
        Ok(f)
    }

    /// The unit hyperbolic family, `ν = 2`.
    pub fn unit_hyperbolic() -> Self {
        FunctionFamily::Hyperbolic { nu: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionFamily::Hyperbolic { nu } if !(*nu > 0.0 && nu.is_finite()) => Err(
                Error::InvalidParams(format!("hyperbolic scale must be positive, got {nu}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FunctionFamily::Rational => "rational",
            FunctionFamily::Hyperbolic { .. } => "hyperbolic",
            FunctionFamily::Elliptic(_) => "elliptic",
        }
    }

    pub fn elliptic_params(&self) -> Option<&EllipticParams> {
        match self {
            FunctionFamily::Elliptic(p) => Some(p),
            _ => None,
        }
    }

    /// `(ν/2, sinh(νx/2), cosh(νx/2))` for the hyperbolic family.
    fn hyp(nu: f64, function: &'static str, x: C64) -> Result<(f64, C64, C64)> {
        let u = 0.5 * nu * x;
        let s = nonzero(function, "sinh(nu x / 2)", u.sinh())?;
        Ok((0.5 * nu, s, u.cosh()))
    }

    /// Pair kernel. Without a spectral argument: `1/x` or `(ν/2)/sinh(νx/2)`.
    /// With one: `−Φ(x, λ)` of the family.
    pub fn l(&self, x: C64, lambda: Option<C64>) -> Result<C64> {
        match (self, lambda) {
            (_, Some(l)) => Ok(-self.phi(x, Spectral::Finite(l))?),
            (FunctionFamily::Rational, None) => Ok(1.0 / nonzero("family_l", "x", x)?),
            (FunctionFamily::Hyperbolic { nu }, None) => {
                let (c, s, _) = Self::hyp(*nu, "family_l", x)?;
                Ok(c / s)
            }
            (FunctionFamily::Elliptic(_), None) => Err(Error::domain(
                "family_l",
                "the elliptic kernel needs a spectral argument",
            )),
        }
    }

    /// `∂l/∂x`.
    pub fn l_dx(&self, x: C64, lambda: Option<C64>) -> Result<C64> {
        match (self, lambda) {
            (_, Some(l)) => Ok(-self.phi_dx(x, Spectral::Finite(l))?),
            (FunctionFamily::Rational, None) => {
                let x = nonzero("family_l_dx", "x", x)?;
                Ok(-1.0 / (x * x))
            }
            (FunctionFamily::Hyperbolic { nu }, None) => {
                let (c, s, ch) = Self::hyp(*nu, "family_l_dx", x)?;
                Ok(-c * c * ch / (s * s))
            }
            (FunctionFamily::Elliptic(_), None) => Err(Error::domain(
                "family_l_dx",
                "the elliptic kernel needs a spectral argument",
            )),
        }
    }

    /// ζ of the family: `1/x`, `(ν/2)coth(νx/2)`, `ζ(x)`.
    pub fn coth(&self, x: C64) -> Result<C64> {
        match self {
            FunctionFamily::Rational => Ok(1.0 / nonzero("family_coth", "x", x)?),
            FunctionFamily::Hyperbolic { nu } => {
                let (c, s, ch) = Self::hyp(*nu, "family_coth", x)?;
                Ok(c * ch / s)
            }
            FunctionFamily::Elliptic(p) => p.zeta(x),
        }
    }

    /// `∂/∂x` of [`coth`](Self::coth); equals `−V(x)`.
    pub fn coth_dx(&self, x: C64) -> Result<C64> {
        Ok(-self.v(x)?)
    }

    /// Potential: `1/x²`, `(ν/2)²/sinh²(νx/2)`, `℘(x)`.
    pub fn v(&self, x: C64) -> Result<C64> {
        match self {
            FunctionFamily::Rational => {
                let x = nonzero("family_v", "x", x)?;
                Ok(1.0 / (x * x))
            }
            FunctionFamily::Hyperbolic { nu } => {
                let (c, s, _) = Self::hyp(*nu, "family_v", x)?;
                Ok(c * c / (s * s))
            }
            FunctionFamily::Elliptic(p) => p.wp(x),
        }
    }

    /// `∂V/∂x`.
    pub fn v_dx(&self, x: C64) -> Result<C64> {
        match self {
            FunctionFamily::Rational => {
                let x = nonzero("family_v_dx", "x", x)?;
                Ok(-2.0 / (x * x * x))
            }
            FunctionFamily::Hyperbolic { nu } => {
                let (c, s, ch) = Self::hyp(*nu, "family_v_dx", x)?;
                Ok(-2.0 * c * c * c * ch / (s * s * s))
            }
            FunctionFamily::Elliptic(p) => p.wp_prime(x),
        }
    }

    /// ζ of the family at a spectral argument; `0` and `ν/2` at infinity
    /// for the degenerate families.
    pub fn zeta_at(&self, lambda: Spectral) -> Result<C64> {
        match (self, lambda) {
            (_, Spectral::Finite(l)) => self.coth(l),
            (FunctionFamily::Rational, Spectral::Infinite) => Ok(C64::new(0.0, 0.0)),
            (FunctionFamily::Hyperbolic { nu }, Spectral::Infinite) => Ok(C64::new(0.5 * nu, 0.0)),
            (FunctionFamily::Elliptic(_), Spectral::Infinite) => Err(Error::domain(
                "family_zeta",
                "the elliptic family has no spectral limit at infinity",
            )),
        }
    }

    /// `Φ(x, λ)`. For the degenerate families this is `ζ(x) + ζ(λ)` of the
    /// family, which satisfies the same addition identity as the elliptic Φ.
    pub fn phi(&self, x: C64, lambda: Spectral) -> Result<C64> {
        match self {
            FunctionFamily::Elliptic(p) => match lambda {
                Spectral::Finite(l) => p.phi(x, l),
                Spectral::Infinite => self.zeta_at(lambda),
            },
            _ => Ok(self.coth(x)? + self.zeta_at(lambda)?),
        }
    }

    /// `∂Φ/∂x`.
    pub fn phi_dx(&self, x: C64, lambda: Spectral) -> Result<C64> {
        match self {
            FunctionFamily::Elliptic(p) => match lambda {
                Spectral::Finite(l) => p.phi_dx(x, l),
                Spectral::Infinite => self.zeta_at(lambda),
            },
            _ => {
                self.zeta_at(lambda)?;
                self.coth_dx(x)
            }
        }
    }
}

/// Squared RS potential factor `f(q)²`.
pub fn rs_radicand(q: C64, family: &FunctionFamily, coupling: &RsCoupling) -> Result<C64> {
    match (&coupling.params, family) {
        (RsParams::Rational { g, .. }, FunctionFamily::Rational) => {
            let q = nonzero("rs_f", "q", q)?;
            Ok(1.0 + g * g / (q * q))
        }
        (RsParams::Hyperbolic { alpha, .. }, FunctionFamily::Hyperbolic { nu }) => {
            let (_, s, _) = FunctionFamily::hyp(*nu, "rs_f", q)?;
            Ok(1.0 + alpha * alpha / (s * s))
        }
        (RsParams::Elliptic { lambda_e, nu_e, .. }, FunctionFamily::Elliptic(p)) => {
            Ok(*lambda_e + *nu_e * p.wp(q)?)
        }
        _ => Err(Error::InvalidParams(format!(
            "RS coupling does not match the {} family",
            family.name()
        ))),
    }
}

/// `d(f²)/dq`.
pub fn rs_radicand_dq(q: C64, family: &FunctionFamily, coupling: &RsCoupling) -> Result<C64> {
    match (&coupling.params, family) {
        (RsParams::Rational { g, .. }, FunctionFamily::Rational) => {
            let q = nonzero("rs_f", "q", q)?;
            Ok(-2.0 * g * g / (q * q * q))
        }
        (RsParams::Hyperbolic { alpha, .. }, FunctionFamily::Hyperbolic { nu }) => {
            let (c, s, ch) = FunctionFamily::hyp(*nu, "rs_f", q)?;
            Ok(-2.0 * c * alpha * alpha * ch / (s * s * s))
        }
        (RsParams::Elliptic { nu_e, .. }, FunctionFamily::Elliptic(p)) => Ok(*nu_e * p.wp_prime(q)?),
        _ => Err(Error::InvalidParams(format!(
            "RS coupling does not match the {} family",
            family.name()
        ))),
    }
}

/// RS potential factor `f(q)`, principal square root of [`rs_radicand`].
pub fn rs_f(q: C64, family: &FunctionFamily, coupling: &RsCoupling) -> Result<C64> {
    let r = rs_radicand(q, family, coupling)?;
    if r.norm() < 1e-14 {
        return Err(Error::domain("rs_f", format!("radicand vanishes at q = {q}")));
    }
    Ok(r.sqrt())
}

/// True when the radicand sits on or next to the negative real axis, where
/// the principal branch of the square root jumps.
pub fn rs_branch_warning(q: C64, family: &FunctionFamily, coupling: &RsCoupling) -> bool {
    match rs_radicand(q, family, coupling) {
        Ok(r) => r.re < 0.0 && r.im.abs() <= 1e-12 * r.norm(),
        Err(_) => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn kernels() {
        assert_eq!(FunctionFamily::Rational.l(c(2.0), None).unwrap(), c(0.5));
        let h = FunctionFamily::unit_hyperbolic();
        let v = h.l(c(1.0), None).unwrap();
        assert!((v - 1.0 / 1.0f64.sinh()).norm() < 1e-15);
        let d = h.l_dx(c(0.5), None).unwrap();
        let exact = -(0.5f64).cosh() / (0.5f64).sinh().powi(2);
        assert!((d - exact).norm() < 1e-14);
        assert!(FunctionFamily::Rational.l(c(0.0), None).is_err());
        assert!(FunctionFamily::hyperbolic(-1.0).is_err());
    }

    #[test]
    fn degenerate_addition_identity() {
        let lam = Spectral::Finite(C64::new(0.7, 0.2));
        for fam in [FunctionFamily::Rational, FunctionFamily::Hyperbolic { nu: 1.3 }] {
            let x = C64::new(0.3, -0.1);
            let lhs = fam.phi(x, lam).unwrap() * fam.phi(-x, lam).unwrap();
            let rhs = fam.v(lam.finite().unwrap()).unwrap() - fam.v(x).unwrap();
            assert!((lhs - rhs).norm() < 1e-13 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let ell = FunctionFamily::Elliptic(EllipticParams::rectangular(1.0, 1.1).unwrap());
        let lam = Spectral::Finite(C64::new(0.4, 0.3));
        for fam in [FunctionFamily::Rational, FunctionFamily::Hyperbolic { nu: 0.8 }, ell] {
            let x = C64::new(0.45, 0.05);
            let h = 1e-6;
            let fd = (fam.phi(x + h, lam).unwrap() - fam.phi(x - h, lam).unwrap()) / (2.0 * h);
            assert!((fd - fam.phi_dx(x, lam).unwrap()).norm() < 1e-8 * fd.norm().max(1.0));
            let fd = (fam.v(x + h).unwrap() - fam.v(x - h).unwrap()) / (2.0 * h);
            assert!((fd - fam.v_dx(x).unwrap()).norm() < 1e-8 * fd.norm().max(1.0));
        }
    }
}
