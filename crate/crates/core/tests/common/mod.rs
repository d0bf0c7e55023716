//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use laxkit::models::{Model, ModelId, ModelParams, SamplerSettings};
use laxkit::phase::PhasePoint;
use laxkit::specfun::{EllipticParams, Spectral};
use laxkit::tensor::{transpose_sites, TensorOperator};
use laxkit::verify::check_linear_rma_given;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn lattices() -> Vec<EllipticParams> {
    [
        (C64::new(1.0, 0.0), C64::new(0.0, 1.0)),
        (C64::new(1.0, 0.0), C64::new(0.3, 0.9)),
        (C64::new(0.7, 0.2), C64::new(-0.1, 1.3)),
    ]
    .into_iter()
    .map(|(a, b)| EllipticParams::new(a, b).unwrap())
    .collect()
}

/// `|a − b| / max(1, |b|)`.
pub fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

pub fn close(a: C64, b: C64, rel: f64) -> bool {
    rel_err(a, b) <= rel
}

fn csc2(z: C64) -> C64 {
    let s = z.sin();
    1.0 / (s * s)
}

/// Lattice sum of ℘ with each row `2mω₁ + 2nω₂` summed in closed form.
pub fn wp_rows(p: &EllipticParams, z: C64, rows: i32) -> C64 {
    let (w1, w2) = (p.omega1(), p.omega2());
    let k = PI / (2.0 * w1);
    let tau = w2 / w1;
    let mut s = C64::new(-1.0 / 3.0, 0.0);
    for n in -rows..=rows {
        s += csc2(k * (z - 2.0 * n as f64 * w2));
        if n != 0 {
            s -= csc2(PI * n as f64 * tau);
        }
    }
    k * k * s
}

/// `η₁/ω₁` from the same row sums.
pub fn eta_over_omega_rows(p: &EllipticParams, rows: i32) -> C64 {
    let k = PI / (2.0 * p.omega1());
    let tau = p.omega2() / p.omega1();
    let mut c = C64::new(1.0 / 3.0, 0.0);
    for n in (-rows..=rows).filter(|&n| n != 0) {
        c += csc2(PI * n as f64 * tau);
    }
    k * k * c
}

/// ζ from the cotangent rows matching [`wp_rows`].
pub fn zeta_rows(p: &EllipticParams, z: C64, rows: i32) -> C64 {
    let (w1, w2) = (p.omega1(), p.omega2());
    let k = PI / (2.0 * w1);
    let mut s = (k * z).cos() / (k * z).sin();
    for n in 1..=rows {
        let shift = 2.0 * n as f64 * w2;
        let (a, b) = (k * (z + shift), k * (z - shift));
        s += a.cos() / a.sin() + b.cos() / b.sin();
    }
    eta_over_omega_rows(p, rows) * z + k * s
}

pub fn random_points(p: &EllipticParams, count: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let (a, b): (f64, f64) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let z = 2.0 * a * p.omega1() + 2.0 * b * p.omega2();
        if p.lattice_distance(z) > 0.15 {
            out.push(z);
        }
    }
    out
}

/// Twenty points across the fundamental cell, minus any too close to a pole.
pub fn grid(p: &EllipticParams) -> Vec<C64> {
    (0..20)
        .map(|k| {
            let a = -0.43 + 0.045 * k as f64;
            let b = 0.41 - 0.037 * k as f64;
            2.0 * a * p.omega1() + 2.0 * b * p.omega2() + C64::new(0.031, 0.017)
        })
        .filter(|&z| p.lattice_distance(z) > 0.1)
        .collect()
}

/// `f'(z)` by the trapezoidal rule on a circle of radius `r`; exponentially
/// accurate while the circle stays clear of poles.
pub fn deriv(f: impl Fn(C64) -> C64, z: C64, r: f64) -> C64 {
    let m = 48;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..m {
        let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
        acc += f(z + r * e) / e;
    }
    acc / (m as f64 * r)
}

/// Worst relative error over the σ/ζ/℘/Φ identities at 50 random points on
/// each test lattice.
pub fn identity_error() -> f64 {
    let mut worst: f64 = 0.0;
    let mut track = |a: C64, b: C64| worst = worst.max(rel_err(a, b));
    for (i, p) in lattices().into_iter().enumerate() {
        let (w1, e1) = (p.omega1(), p.eta1());
        let (w2, e2) = (p.omega2(), p.eta2());
        for z in random_points(&p, 50, 7 + i as u64) {
            let s = p.sigma(z).unwrap();
            let zt = p.zeta(z).unwrap();
            let w = p.wp(z).unwrap();
            track(p.sigma(-z).unwrap(), -s);
            track(p.zeta(-z).unwrap(), -zt);
            track(p.wp(-z).unwrap(), w);
            track(deriv(|u| p.sigma(u).unwrap(), z, 0.05) / s, zt);
            track(-deriv(|u| p.zeta(u).unwrap(), z, 0.05), w);
            track(p.wp_prime(z).unwrap(), deriv(|u| p.wp(u).unwrap(), z, 0.05));
            for (wk, ek) in [(w1, e1), (w2, e2)] {
                track(p.zeta(z + 2.0 * wk).unwrap(), zt + 2.0 * ek);
                track(p.wp(z + 2.0 * wk).unwrap(), w);
                track(p.sigma(z + 2.0 * wk).unwrap(), -(2.0 * ek * (z + wk)).exp() * s);
            }
        }
        track(e1 * w2 - e2 * w1, C64::new(0.0, PI / 2.0));
        let xs = random_points(&p, 50, 100 + i as u64);
        let ls = random_points(&p, 50, 200 + i as u64);
        for (x, l) in xs.into_iter().zip(ls) {
            if p.lattice_distance(x + l) < 0.15 || p.lattice_distance(x - l) < 0.15 {
                continue;
            }
            track(p.phi(x, l).unwrap() * p.phi(-x, l).unwrap(), p.wp(l).unwrap() - p.wp(x).unwrap());
        }
    }
    worst
}

/// Worst relative error of ℘ and ζ against the row-summed lattice on the grid.
pub fn lattice_sum_error() -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in lattices() {
        for z in grid(&p) {
            worst = worst.max(rel_err(p.wp(z).unwrap(), wp_rows(&p, z, 40)));
            worst = worst.max(rel_err(p.zeta(z).unwrap(), zeta_rows(&p, z, 40)));
            count += 1;
        }
    }
    (worst, count)
}

pub fn setup(id: ModelId, n: usize, seed: u64) -> (Model, PhasePoint) {
    let model = Model::from_id(id, n, &ModelParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = model.sample(&mut rng, &SamplerSettings::default(), model.backend()).unwrap();
    (model, x)
}

/// `r + ε E₀₁ ⊗ E₁₀`.
pub fn corrupted(r: &TensorOperator, eps: f64) -> TensorOperator {
    let mut r = r.clone();
    r.add_at(0, 1, 1, 0, C64::new(eps, 0.0));
    r
}

/// Spectral-free linear relation with an explicit r.
pub fn direct_rma(model: &Model, x: &PhasePoint, r: &TensorOperator) -> f64 {
    let inf = Spectral::Infinite;
    check_linear_rma_given(model, x, (inf, inf), r, &transpose_sites(r), model.backend(), 1e-7).residual
}
