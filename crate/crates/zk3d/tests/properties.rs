//! Property tests for invariants that hold on arbitrary inputs.

use proptest::prelude::*;
use std::f64::consts::PI;

use zk3d::*;

fn small_grid() -> Grid3 {
    make_grid(2.0, 1.0, 1.5, 7, 6, 8).unwrap()
}

fn field_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-100.0..100.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_sandwich(vals in field_values(7 * 6 * 8)) {
        let g = small_grid();
        let f = Field3::from_values(g, BcTag::Free, vals).unwrap();
        let l2sq = norm(&f, NormKind::L2).powi(2);
        let w = weighted_l2_sq(&f);
        prop_assert!(l2sq <= w * (1.0 + 1e-12) + 1e-300);
        prop_assert!(w <= (1.0 + g.len[0]) * l2sq * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn quadrature_positive_definite(vals in field_values(7 * 6 * 8)) {
        let g = small_grid();
        let f = Field3::from_values(g, BcTag::Free, vals.clone()).unwrap();
        let sq = integrate(&f.map(|v| v * v));
        prop_assert!(sq >= 0.0);
        if vals.iter().any(|&v| v != 0.0) {
            prop_assert!(sq > 0.0);
        }
    }

    #[test]
    fn deriv_exact_on_affine(a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let g = small_grid();
        let f = Field3::from_fn(g, BcTag::Free, |x, _, _| a + b * x).unwrap();
        let d = deriv(&f, Axis::X);
        for &v in d.values() {
            prop_assert!((v - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn envelope_monotone_in_time(initial in 0.0..1e6f64, rate in 0.0..10.0f64,
                                 t1 in 0.0..50.0f64, dt in 0.0..50.0f64) {
        let e1 = decay_envelope(initial, rate, t1).unwrap();
        let e2 = decay_envelope(initial, rate, t1 + dt).unwrap();
        prop_assert!(e2 <= e1);
    }

    #[test]
    fn theta_stays_in_unit_interval(q in 2.0..=6.0f64) {
        let th = theta(q).unwrap();
        prop_assert!((0.0..=1.0).contains(&th));
    }

    #[test]
    fn ineq_ratios_scale_invariant(c in prop::sample::select(
        vec![-100.0, -3.5, -1e-3, 1e-3, 0.7, 42.0]), m in 1usize..4) {
        let g = make_grid(PI, PI, PI, 13, 13, 13).unwrap();
        let base = Field3::from_fn(g, BcTag::DirichletAll, |x, y, z| {
            (m as f64 * x).sin() * y.sin() * (2.0 * z).sin() + 0.3 * (x.sin() * y.sin() * z.sin())
        }).unwrap();
        let scaled = Field3::from_values(
            g, BcTag::DirichletAll, base.values().iter().map(|v| c * v).collect()).unwrap();
        let s1 = steklov_ratio(&base, Axis::Y).unwrap();
        let s2 = steklov_ratio(&scaled, Axis::Y).unwrap();
        prop_assert!((s1 - s2).abs() <= 1e-12 * s1.abs());
        for q in [3.0, 4.0] {
            let i1 = interpolation_ratio(&base, q).unwrap();
            let i2 = interpolation_ratio(&scaled, q).unwrap();
            prop_assert!((i1 - i2).abs() <= 1e-12 * i1.abs());
        }
    }

    #[test]
    fn fit_recovers_exact_rates(rate in 0.0..5.0f64, initial in 1e-6..1e3f64) {
        let series: Vec<_> = (0..40).map(|i| {
            let t = 0.1 * i as f64;
            let v = initial * (-rate * t).exp();
            zk3d::DiagnosticsRecord {
                t, l2_sq: v, w_l2_sq: v, trace_x0: 0.0, trace_accum: 0.0,
                ux_sq: v, uy_sq: v, uz_sq: v, h2_sq: v, ut_w_sq: v,
                second_yz: v, uxx_sq: v, trace_xy: 0.0, trace_xz: 0.0,
                trace_xyy: 0.0, trace_xzz: 0.0, trace_xyz: 0.0,
            }
        }).collect();
        let fit = fit_decay_rate(&series, Functional::H2Sq, (0.0, 4.0)).unwrap();
        prop_assert!((fit.rate - rate).abs() < 1e-10 * (1.0 + rate));
        prop_assert!(fit.r_squared > 1.0 - 1e-10);
    }

    #[test]
    fn certificate_never_flips_when_data_shrinks(
        u0 in 0.0..3e-3f64, j0 in 0.0..1.5e-5f64, shrink in 0.0..1.0f64) {
        let p = PhysParams::new(1.0, PI, PI, PI).unwrap();
        let big = check_hypotheses(
            &compute_constants(&p, u0, C1Convention::TheoremStatement).unwrap(),
            p.c_s, u0, j0).unwrap();
        if big.overall {
            let (us, js) = (u0 * shrink, j0 * shrink);
            let small = check_hypotheses(
                &compute_constants(&p, us, C1Convention::TheoremStatement).unwrap(),
                p.c_s, us, js).unwrap();
            prop_assert!(small.overall);
        }
    }
}

/// Invariants of the run series that need an actual trajectory.
#[test]
fn series_invariants_on_bump_run() {
    let cfg = SolverConfig {
        params: PhysParams::new(1.0, PI, PI, PI).unwrap(),
        n: [17, 17, 17],
        dt: 4e-3,
        t_end: 0.4,
        nonlinear: NonlinearMode::default(),
        forcing: None,
        record_every: 5,
    };
    let solver = Solver::new(cfg).unwrap();
    let u0 = make_initial_bump(solver.grid(), 1e-3).unwrap();
    let (_, series) = solver.run(&u0).unwrap();
    let lx = PI;
    for w in series.windows(2) {
        assert!(w[1].trace_accum >= w[0].trace_accum, "trace_accum nondecreasing");
        assert!(w[1].t > w[0].t);
    }
    for r in &series {
        assert!(r.l2_sq <= r.w_l2_sq * (1.0 + 1e-12));
        assert!(r.w_l2_sq <= (1.0 + lx) * r.l2_sq * (1.0 + 1e-12));
        assert!(r.h2_sq >= 0.0 && r.second_yz >= 0.0 && r.ut_w_sq >= 0.0);
    }
}

/// Scaling the initial data scales every quadratic functional by the
/// square and leaves fitted rates unchanged (linearized regime).
#[test]
fn quadratic_scaling_preserves_rates() {
    let run = |amp: f64| {
        let cfg = SolverConfig {
            params: PhysParams::new(1.0, PI, PI, PI).unwrap(),
            n: [17, 17, 17],
            dt: 4e-3,
            t_end: 1.0,
            nonlinear: NonlinearMode::default(),
            forcing: None,
            record_every: 10,
        };
        let solver = Solver::new(cfg).unwrap();
        let u0 = make_initial_bump(solver.grid(), amp).unwrap();
        let (_, series) = solver.run(&u0).unwrap();
        series
    };
    let s1 = run(1e-10);
    let s2 = run(2e-10);
    for (a, b) in s1.iter().zip(&s2) {
        if a.l2_sq > 0.0 {
            assert!((b.l2_sq / a.l2_sq - 4.0).abs() < 1e-6);
            assert!((b.h2_sq / a.h2_sq - 4.0).abs() < 1e-6);
        }
    }
    let f1 = fit_decay_rate(&s1, Functional::WL2Sq, (0.2, 1.0)).unwrap();
    let f2 = fit_decay_rate(&s2, Functional::WL2Sq, (0.2, 1.0)).unwrap();
    assert!(
        (f1.rate - f2.rate).abs() < 1e-8,
        "rates {} vs {}",
        f1.rate,
        f2.rate
    );
}

/// The discrete quadrature is spectrally accurate on the bump (periodic
/// smooth integrand), so the recorded l2_sq matches the closed form
/// a^2 (3 pi^3 / 32) far better than 1e-6 relative.
#[test]
fn bump_l2_matches_analytic_value() {
    let g = make_grid(PI, PI, PI, 49, 49, 49).unwrap();
    let a = 0.3;
    let u0 = make_initial_bump(g, a).unwrap();
    let l2sq = norm(&u0, NormKind::L2).powi(2);
    let exact = a * a * 3.0 * PI.powi(3) / 32.0;
    assert!(
        ((l2sq - exact) / exact).abs() < 1e-6,
        "rel err {}",
        ((l2sq - exact) / exact).abs()
    );
}
