use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{CheckReport, Measured};
use crate::error::{Error, Result};
use crate::specfun::{EllipticParams, FunctionFamily};

/// Lattice whose finite period reproduces the hyperbolic family of scale
/// `ν`: `ω₁ = iπ/ν`, `ω₂ = −Im(τ)·π/ν`, so `τ = i·Im(τ)`.
pub fn degeneration_lattice(nu: f64, im_tau: f64) -> Result<EllipticParams> {
    if !(nu > 0.0) || !(im_tau > 0.0) {
        return Err(Error::InvalidParams(format!(
            "degeneration needs nu > 0 and Im tau > 0 (got {nu}, {im_tau})"
        )));
    }
    EllipticParams::new(C64::new(0.0, PI / nu), C64::new(-im_tau * PI / nu, 0.0))
}

/// Largest mismatches on the argument grid.
#[derive(Clone, Copy, Debug)]
pub struct DegenerationMismatch {
    /// `℘(x) − ν²/12` against `(ν/2)²/sinh²(νx/2)`.
    pub wp: f64,
    /// `ζ(x) + ν²x/12` against `(ν/2)coth(νx/2)`.
    pub zeta: f64,
}

fn grid(nu: f64) -> impl Iterator<Item = f64> {
    (0..12).map(move |k| (0.15 + 0.1 * k as f64) * 2.0 / nu)
}

fn mismatch(p: &EllipticParams, nu: f64) -> Result<DegenerationMismatch> {
    let hyp = FunctionFamily::hyperbolic(nu)?;
    let c = nu * nu / 12.0;
    let mut out = DegenerationMismatch { wp: 0.0, zeta: 0.0 };
    for x in grid(nu) {
        let z = C64::new(x, 0.0);
        let v = hyp.v(z)?;
        out.wp = out.wp.max((p.wp(z)? - c - v).norm() / v.norm().max(1.0));
        let k = hyp.coth(z)?;
        out.zeta = out.zeta.max((p.zeta(z)? + c * z - k).norm() / k.norm().max(1.0));
    }
    Ok(out)
}

/// Elliptic → hyperbolic limit of `℘` and `ζ` on a fixed grid. The
/// constants `ν²/12` are the `Im τ → ∞` limits of `−η₁/ω₁`.
pub fn check_degeneration(nu: f64, im_tau: f64, tol: f64) -> CheckReport {
    let out = (|| {
        let p = degeneration_lattice(nu, im_tau)?;
        let m = mismatch(&p, nu)?;
        let eta_const = (-p.eta1() / p.omega1()).re;
        Ok(Measured::new(m.wp.max(m.zeta), 1.0)
            .note(format!("wp mismatch={:.3e}", m.wp))
            .note(format!("zeta mismatch={:.3e}", m.zeta))
            .note(format!("Im tau={im_tau} nu={nu} -eta1/omega1={eta_const:.12e}")))
    })();
    CheckReport::from_result("degeneration", "elliptic->hyperbolic", 0, tol, out)
}
