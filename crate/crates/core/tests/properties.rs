use laxkit::cli::{self, RunConfig, RunReport, Summary};
use laxkit::models::{Model, ModelId, ModelParams, SamplerSettings};
use laxkit::phase::PhasePoint;
use laxkit::specfun::{EllipticParams, Spectral};
use laxkit::tensor::{spectrum_distance, transpose_sites, TensorOperator};
use laxkit::verify::{
    check_dynamical_cybe, check_involution, check_linear_rma, check_quadratic_rs, CartanBasis, CheckReport,
    DEFAULT_LAMBDA, DEFAULT_MU, DEFAULT_NU,
};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sample(model: &Model, seed: u64) -> PhasePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    model.sample(&mut rng, &SamplerSettings::default(), model.backend()).unwrap()
}

fn lattice() -> impl Strategy<Value = EllipticParams> {
    // ω₂ = τω₁ with Re τ ∈ (−0.4, 0.4), Im τ ∈ (0.7, 1.5)
    (0.6f64..1.4, -0.3f64..0.3, -0.4f64..0.4, 0.7f64..1.5).prop_map(|(a, b, c, d)| {
        let w1 = C64::new(a, b);
        EllipticParams::new(w1, C64::new(c, d) * w1).unwrap()
    })
}

fn linear_models() -> impl Strategy<Value = ModelId> {
    prop::sample::select(vec![
        ModelId::CmRational,
        ModelId::CmHyperbolic,
        ModelId::CmElliptic,
        ModelId::CmSlN,
        ModelId::CmSpinRational,
        ModelId::CmSpinHyperbolic,
        ModelId::CmSpinElliptic,
    ])
}

fn close(a: C64, b: C64, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zeta_odd_wp_even(p in lattice(), a in -0.45f64..0.45, b in -0.45f64..0.45) {
        let z = 2.0 * a * p.omega1() + 2.0 * b * p.omega2();
        prop_assume!(p.lattice_distance(z) > 0.1);
        prop_assert!(close(p.zeta(-z).unwrap(), -p.zeta(z).unwrap(), 1e-9));
        prop_assert!(close(p.wp(-z).unwrap(), p.wp(z).unwrap(), 1e-9));
        prop_assert!(close(p.sigma(-z).unwrap(), -p.sigma(z).unwrap(), 1e-9));
    }

    #[test]
    fn phi_addition(p in lattice(), a in -0.45f64..0.45, b in -0.45f64..0.45, c in -0.45f64..0.45, d in -0.45f64..0.45) {
        let x = 2.0 * a * p.omega1() + 2.0 * b * p.omega2();
        let l = 2.0 * c * p.omega1() + 2.0 * d * p.omega2();
        for z in [x, l, x + l, x - l] {
            prop_assume!(p.lattice_distance(z) > 0.1);
        }
        let lhs = p.phi(x, l).unwrap() * p.phi(-x, l).unwrap();
        prop_assert!(close(lhs, p.wp(l).unwrap() - p.wp(x).unwrap(), 1e-9));
    }

    #[test]
    fn linear_relation_holds_for_any_seed(id in linear_models(), n in 2usize..=4, seed in any::<u64>()) {
        let model = Model::from_id(id, n, &ModelParams::default()).unwrap();
        let x = sample(&model, seed);
        let r = check_linear_rma(&model, &x, DEFAULT_LAMBDA, DEFAULT_MU, model.backend(), 1e-7);
        prop_assert!(r.pass, "{} n={} seed={}: {:.3e}", id, n, seed, r.residual);
    }

    #[test]
    fn linear_relation_for_any_coupling(n in 2usize..=4, seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0,
                                        id in prop::sample::select(vec![ModelId::CmRational, ModelId::CmHyperbolic, ModelId::CmElliptic])) {
        let params = ModelParams { coupling: Some([re, im]), ..ModelParams::default() };
        let model = Model::from_id(id, n, &params).unwrap();
        let x = sample(&model, seed);
        let r = check_linear_rma(&model, &x, DEFAULT_LAMBDA, DEFAULT_MU, model.backend(), 1e-7);
        prop_assert!(r.pass, "{}: {:.3e}", id, r.residual);
    }

    #[test]
    fn quadratic_relation_holds_for_any_seed(
        id in prop::sample::select(vec![ModelId::RsRational, ModelId::RsHyperbolic, ModelId::RsElliptic]),
        n in 2usize..=3,
        seed in any::<u64>(),
    ) {
        let model = Model::from_id(id, n, &ModelParams::default()).unwrap();
        let x = sample(&model, seed);
        let r = check_quadratic_rs(&model, &x, DEFAULT_LAMBDA, DEFAULT_MU, 1e-7);
        prop_assert!(r.pass, "{} n={} seed={}: {:.3e}", id, n, seed, r.residual);
    }

    #[test]
    fn involution_for_any_orders(id in linear_models(), m in 1u32..=4, k in 1u32..=4, seed in any::<u64>()) {
        let model = Model::from_id(id, 3, &ModelParams::default()).unwrap();
        let x = sample(&model, seed);
        let r = check_involution(&model, &x, (m, k), DEFAULT_LAMBDA, DEFAULT_MU, model.backend(), 1e-7);
        prop_assert!(r.pass, "{} ({}, {}): {:.3e}", id, m, k, r.residual);
    }

    #[test]
    fn translation_leaves_lax_unchanged(
        id in prop::sample::select(vec![ModelId::CmRational, ModelId::CmHyperbolic, ModelId::CmElliptic, ModelId::RsElliptic]),
        seed in any::<u64>(),
        shift in -3.0f64..3.0,
    ) {
        let model = Model::from_id(id, 3, &ModelParams::default()).unwrap();
        let x = sample(&model, seed);
        let y = PhasePoint::new(x.q().iter().map(|q| q + shift).collect(), x.p().to_vec()).unwrap();
        let lam = Spectral::Finite(DEFAULT_LAMBDA);
        let (a, b) = (model.lax(&x, lam).unwrap(), model.lax(&y, lam).unwrap());
        prop_assert!((&a - &b).norm() <= 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn cartan_basis_change_is_invisible(seed in any::<u64>(), entries in prop::collection::vec(-1.0f64..1.0, 9)) {
        let model = Model::from_id(ModelId::CmSunn, 2, &ModelParams::default()).unwrap();
        let x = sample(&model, seed);
        let std = CartanBasis::standard(&model);
        let a = DMatrix::from_fn(2, 2, |i, j| entries[i * 2 + j] + if i == j { 2.0 } else { 0.0 });
        let moved = std.transformed(&a).unwrap();
        let lams = [DEFAULT_LAMBDA, DEFAULT_MU, DEFAULT_NU];
        let r0 = check_dynamical_cybe(&model, &x, lams, &std, 1.0).residual;
        let r1 = check_dynamical_cybe(&model, &x, lams, &moved, 1.0).residual;
        prop_assert!((r0 - r1).abs() <= 1e-6 * r0.max(1.0), "{} vs {}", r0, r1);
    }

    #[test]
    fn site_transpose_is_an_involution(entries in prop::collection::vec(-1.0f64..1.0, 2 * 81)) {
        let m = DMatrix::from_fn(9, 9, |i, j| C64::new(entries[i * 9 + j], entries[81 + i * 9 + j]));
        let t = TensorOperator::from_matrix(3, m).unwrap();
        prop_assert!((&transpose_sites(&transpose_sites(&t)) - &t).fnorm() == 0.0);
    }

    #[test]
    fn spectrum_distance_ignores_order(v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..6), rot in 0usize..6) {
        let a: Vec<C64> = v.iter().map(|&(re, im)| C64::new(re, im)).collect();
        let mut b = a.clone();
        let k = rot % b.len();
        b.rotate_left(k);
        prop_assert!(spectrum_distance(&a, &b) < 1e-12);
        prop_assert!((spectrum_distance(&a, &b) - spectrum_distance(&b, &a)).abs() < 1e-12);
    }

    #[test]
    fn summary_matches_rows(rows in prop::collection::vec((0.0f64..2.0, any::<bool>()), 0..30)) {
        let checks: Vec<CheckReport> = rows
            .iter()
            .enumerate()
            .map(|(i, &(res, gated))| {
                let mut c = CheckReport::from_residual("c", "m", 2, res, 1.0, 1.0).with_seed(i as u64);
                c.gated = gated;
                c
            })
            .collect();
        let s = Summary::of(&checks);
        prop_assert_eq!(s.total, checks.len());
        prop_assert_eq!(s.passed + s.failed, s.total);
        prop_assert_eq!(s.passed, rows.iter().filter(|r| r.0 < 1.0).count());
        prop_assert_eq!(s.blocking, rows.iter().filter(|r| r.0 >= 1.0 && r.1).count());
    }

    #[test]
    fn config_round_trips(
        models in prop::collection::vec(prop::sample::select(ModelId::ALL.to_vec()), 1..4),
        n in prop::collection::vec(1usize..5, 1..3),
        seeds in prop::collection::vec(any::<u64>(), 1..4),
        tol in prop::option::of(1e-12f64..1.0),
        coupling in prop::option::of((-2.0f64..2.0, -2.0f64..2.0)),
        det in any::<bool>(),
    ) {
        let mut c = RunConfig { model: models, n, seeds, tol, deterministic_report: det, ..RunConfig::default() };
        c.params.coupling = coupling.map(|(a, b)| [a, b]);
        c.spectral.lambda = [0.25, -0.125];
        let rep = RunReport::new("verify", &c, vec![], None);
        let back: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        let echoed = RunConfig::from_json(&back["config"].to_string()).unwrap();
        prop_assert_eq!(echoed, c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// 0 when gated checks pass, 2 when a tolerance is out of reach, 1 on a bad config.
    #[test]
    fn exit_code_contract(seed in 0u64..1000, n in 2usize..=3, loose in any::<bool>(), bogus in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let report = dir.path().join("r.json");
        let model = if bogus { "cm-bogus" } else { "cm-rational" };
        let tol = if loose { "1e-6" } else { "1e-30" };
        let args = [
            "laxkit", "verify", "--model", model, "--n", &n.to_string(), "--seed", &seed.to_string(),
            "--check", "linear-rma,involution", "--tol", tol, "--report", report.to_str().unwrap(),
        ];
        let code = cli::run(args);
        let want = if bogus { 1 } else if loose { 0 } else { 2 };
        prop_assert_eq!(code, want);
    }
}
