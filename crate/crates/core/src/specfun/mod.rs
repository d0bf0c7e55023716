//! Elliptic functions and their rational/hyperbolic degenerations.

mod family;
mod weierstrass;

pub use family::{rs_branch_warning, rs_f, rs_radicand, rs_radicand_dq, FunctionFamily, Spectral};
pub use weierstrass::{EllipticParams, HalfPeriods, POLE_GUARD, SERIES_CAP, SERIES_RTOL};
