//! Functional time series for the energy and decay estimates, envelope and
//! boundedness checks, decay-rate fitting and the two-trajectory
//! continuous-dependence experiment.

use crate::error::{Error, Result};
use crate::grid::{
    deriv, norm, second_deriv, trace_x0_sq, weighted_l2_sq, Axis, Field3, NormKind,
};
use crate::solver::{SimState, Solver, SolverConfig};

/// One row of the functional time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// |u|^2
    pub l2_sq: f64,
    /// ((1+x), u^2)
    pub w_l2_sq: f64,
    /// boundary trace integral of u_x^2 over the x = 0 face
    pub trace_x0: f64,
    /// running time integral of the trace (trapezoid in time)
    pub trace_accum: f64,
    pub ux_sq: f64,
    pub uy_sq: f64,
    pub uz_sq: f64,
    /// |u|_{H^2}^2
    pub h2_sq: f64,
    /// ((1+x), u_t^2), u_t from the equation
    pub ut_w_sq: f64,
    /// ((1+x), u_yy^2 + u_zz^2 + u_yz^2)
    pub second_yz: f64,
    /// |u_xx|^2
    pub uxx_sq: f64,
    /// traces of u_xy^2 and u_xz^2 at x = 0
    pub trace_xy: f64,
    pub trace_xz: f64,
    /// traces of u_xyy^2, u_xzz^2, u_xyz^2 at x = 0
    pub trace_xyy: f64,
    pub trace_xzz: f64,
    pub trace_xyz: f64,
}

/// Populate one row from the current state. u_t comes from the cached
/// equation evaluation, never from differencing in time.
pub fn record(state: &SimState) -> DiagnosticsRecord {
    let u = &state.u;
    let dy = deriv(u, Axis::Y);
    let dz = deriv(u, Axis::Z);
    let dyy = second_deriv(u, Axis::Y);
    let dzz = second_deriv(u, Axis::Z);
    let dyz = deriv(&dy, Axis::Z);
    let uxx = second_deriv(u, Axis::X);

    let wyy = weighted_l2_sq(&dyy);
    let wzz = weighted_l2_sq(&dzz);
    let wyz = weighted_l2_sq(&dyz);

    DiagnosticsRecord {
        t: state.t,
        l2_sq: norm(u, NormKind::L2).powi(2),
        w_l2_sq: weighted_l2_sq(u),
        trace_x0: trace_x0_sq(u),
        trace_accum: state.trace_accum,
        ux_sq: norm(&deriv(u, Axis::X), NormKind::L2).powi(2),
        uy_sq: norm(&dy, NormKind::L2).powi(2),
        uz_sq: norm(&dz, NormKind::L2).powi(2),
        h2_sq: norm(u, NormKind::H2).powi(2),
        ut_w_sq: weighted_l2_sq(&state.u_t_cache),
        second_yz: wyy + wzz + wyz,
        uxx_sq: norm(&uxx, NormKind::L2).powi(2),
        trace_xy: trace_x0_sq(&dy),
        trace_xz: trace_x0_sq(&dz),
        trace_xyy: trace_x0_sq(&dyy),
        trace_xzz: trace_x0_sq(&dzz),
        trace_xyz: trace_x0_sq(&dyz),
    }
}

/// Column selector for the analysis routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    L2Sq,
    WL2Sq,
    TraceX0,
    UxSq,
    UySq,
    UzSq,
    H2Sq,
    UtWSq,
    SecondYz,
    UxxSq,
}

impl Functional {
    pub fn value(&self, r: &DiagnosticsRecord) -> f64 {
        match self {
            Functional::L2Sq => r.l2_sq,
            Functional::WL2Sq => r.w_l2_sq,
            Functional::TraceX0 => r.trace_x0,
            Functional::UxSq => r.ux_sq,
            Functional::UySq => r.uy_sq,
            Functional::UzSq => r.uz_sq,
            Functional::H2Sq => r.h2_sq,
            Functional::UtWSq => r.ut_w_sq,
            Functional::SecondYz => r.second_yz,
            Functional::UxxSq => r.uxx_sq,
        }
    }
}

/// Residual of the energy identity |u|^2(t) + trace_accum(t) = |u_0|^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyResidual {
    pub max_abs: f64,
    /// max_abs divided by |u_0|^2 (zero for an identically zero run)
    pub normalized: f64,
}

pub fn energy_identity_residual(series: &[DiagnosticsRecord]) -> Result<EnergyResidual> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let e0 = series[0].l2_sq;
    let max_abs = series
        .iter()
        .map(|r| (r.l2_sq + r.trace_accum - e0).abs())
        .fold(0.0f64, f64::max);
    let normalized = if e0 > 0.0 {
        max_abs / e0
    } else if max_abs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(EnergyResidual { max_abs, normalized })
}

/// Outcome of a pointwise envelope comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCheck {
    pub pass: bool,
    /// max over records of functional / envelope
    pub worst_ratio: f64,
}

/// Verify functional(t) <= (1 + slack) * initial * exp(-rate t) at every
/// record.
pub fn check_envelope(
    series: &[DiagnosticsRecord],
    functional: Functional,
    initial: f64,
    rate: f64,
    slack: f64,
) -> EnvelopeCheck {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for r in series {
        let env = initial * (-rate * r.t).exp();
        let v = functional.value(r);
        let ratio = if env > 0.0 {
            v / env
        } else if v == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(ratio);
        if v > (1.0 + slack) * env {
            pass = false;
        }
    }
    EnvelopeCheck {
        pass,
        worst_ratio: worst,
    }
}

/// Least-squares exponential rate of a functional over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// negated slope of log(functional) vs t
    pub rate: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

pub fn fit_decay_rate(
    series: &[DiagnosticsRecord],
    functional: Functional,
    window: (f64, f64),
) -> Result<DecayFit> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut pts = Vec::new();
    let mut bad = Vec::new();
    for r in series {
        if r.t < window.0 || r.t > window.1 {
            continue;
        }
        let v = functional.value(r);
        if v <= 0.0 {
            bad.push(r.t);
        } else {
            pts.push((r.t, v.ln()));
        }
    }
    if !bad.is_empty() {
        return Err(Error::NonpositiveInWindow { times: bad });
    }
    if pts.len() < 2 {
        return Err(Error::Validation(format!(
            "need at least 2 records in window [{}, {}], found {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let (st, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (tm, ym) = (st / n, sy / n);
    let mut stt = 0.0;
    let mut sty = 0.0;
    for &(t, y) in &pts {
        stt += (t - tm) * (t - tm);
        sty += (t - tm) * (y - ym);
    }
    if stt == 0.0 {
        return Err(Error::Validation("degenerate window: single time".into()));
    }
    let slope = sty / stt;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(t, y) in &pts {
        let pred = ym + slope * (t - tm);
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - ym) * (y - ym);
    }
    // a perfectly constant series is a perfect fit with rate 0
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(DecayFit {
        rate: -slope,
        r_squared,
        window,
    })
}

/// Boundedness check (mode A): functional never exceeds `bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundednessCheck {
    pub pass: bool,
    pub max_value: f64,
}

pub fn check_boundedness(
    series: &[DiagnosticsRecord],
    functional: Functional,
    bound: f64,
) -> BoundednessCheck {
    let max_value = series
        .iter()
        .map(|r| functional.value(r))
        .fold(0.0f64, f64::max);
    BoundednessCheck {
        pass: max_value <= bound,
        max_value,
    }
}

/// Pointwise gradient bound (mode B):
/// |u_x|^2(t) <= C_1 |u|^2(t) + (2/5)(1+L) ((1+x), u_t^2)(t),
/// with C_1 in the estimate-derived (2/5-scaled) convention.
pub fn check_gradient_inequality(
    series: &[DiagnosticsRecord],
    c1_estimate_iii: f64,
    lx: f64,
) -> BoundednessCheck {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for r in series {
        let rhs = c1_estimate_iii * r.l2_sq + 0.4 * (1.0 + lx) * r.ut_w_sq;
        // tiny relative headroom for roundoff in the quadratures
        if r.ux_sq > rhs * (1.0 + 1e-12) {
            pass = false;
        }
        let ratio = if rhs > 0.0 {
            r.ux_sq / rhs
        } else if r.ux_sq == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(ratio);
    }
    BoundednessCheck {
        pass,
        max_value: worst,
    }
}

/// Worst amplification of the weighted difference functional between two
/// trajectories started from `u0_a` and `u0_b` under the same config:
/// sup_t ((1+x), w^2)(t) / ((1+x), w_0^2), w = u_a - u_b.
///
/// Identical inputs return exactly 0: the trajectories are bit-identical,
/// which is the discrete uniqueness statement.
pub fn continuous_dependence(cfg: &SolverConfig, u0_a: &Field3, u0_b: &Field3) -> Result<f64> {
    if u0_a.values() == u0_b.values() {
        return Ok(0.0);
    }
    let w0 = u0_a.zip_with(u0_b, |a, b| a - b);
    let denom = weighted_l2_sq(&w0);
    if denom <= 0.0 {
        return Err(Error::Validation(
            "difference of initial data has zero weighted norm".into(),
        ));
    }
    let solver = Solver::new(cfg.clone())?;
    let mut sa = solver.init_state(u0_a)?;
    let mut sb = solver.init_state(u0_b)?;
    let n_steps = (cfg.t_end / cfg.dt).round() as u64;
    let mut worst = 1.0f64; // ratio at t = 0
    for s in 1..=n_steps {
        solver.step(&mut sa)?;
        solver.step(&mut sb)?;
        if s % cfg.record_every as u64 == 0 || s == n_steps {
            let w = sa.u.zip_with(&sb.u, |a, b| a - b);
            worst = worst.max(weighted_l2_sq(&w) / denom);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, BcTag};
    use crate::solver::{make_initial_bump, NonlinearMode};
    use crate::theory::PhysParams;
    use std::f64::consts::PI;

    fn synthetic(ts: &[f64], f: impl Fn(f64) -> f64) -> Vec<DiagnosticsRecord> {
        ts.iter()
            .map(|&t| {
                let v = f(t);
                DiagnosticsRecord {
                    t,
                    l2_sq: v,
                    w_l2_sq: v,
                    trace_x0: 0.0,
                    trace_accum: 0.0,
                    ux_sq: v,
                    uy_sq: v,
                    uz_sq: v,
                    h2_sq: v,
                    ut_w_sq: v,
                    second_yz: v,
                    uxx_sq: v,
                    trace_xy: 0.0,
                    trace_xz: 0.0,
                    trace_xyy: 0.0,
                    trace_xzz: 0.0,
                    trace_xyz: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn fit_exact_exponential() {
        let ts: Vec<f64> = (0..60).map(|i| 0.1 * i as f64).collect();
        let series = synthetic(&ts, |t| (-2.0 * t).exp());
        let fit = fit_decay_rate(&series, Functional::L2Sq, (0.0, 6.0)).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-10, "{}", fit.rate);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn fit_constant_series() {
        let ts: Vec<f64> = (0..20).map(|i| 0.1 * i as f64).collect();
        let series = synthetic(&ts, |_| 3.5);
        let fit = fit_decay_rate(&series, Functional::L2Sq, (0.0, 2.0)).unwrap();
        assert!(fit.rate.abs() < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn fit_perturbed_exponential() {
        let ts: Vec<f64> = (0..200).map(|i| 0.05 * i as f64).collect();
        let series = synthetic(&ts, |t| (-2.0 * t).exp() * (1.0 + 0.01 * t.sin()));
        let fit = fit_decay_rate(&series, Functional::L2Sq, (0.0, 10.0)).unwrap();
        assert!((fit.rate - 2.0).abs() < 0.02, "{}", fit.rate);
    }

    #[test]
    fn fit_rejects_nonpositive_and_reports_times() {
        let ts: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let mut series = synthetic(&ts, |t| (-t).exp());
        series[3].l2_sq = 0.0;
        series[7].l2_sq = -1.0;
        match fit_decay_rate(&series, Functional::L2Sq, (0.0, 9.0)) {
            Err(Error::NonpositiveInWindow { times }) => assert_eq!(times, vec![3.0, 7.0]),
            other => panic!("expected NonpositiveInWindow, got {other:?}"),
        }
    }

    #[test]
    fn envelope_trivial_cases() {
        let ts: Vec<f64> = (0..10).map(|i| 0.5 * i as f64).collect();
        let zero = synthetic(&ts, |_| 0.0);
        let c = check_envelope(&zero, Functional::WL2Sq, 1.0, 2.0, 0.05);
        assert!(c.pass);
        assert_eq!(c.worst_ratio, 0.0);

        // series equal to the envelope: worst ratio 1, passes for slack > 0
        let env = synthetic(&ts, |t| 2.0 * (-0.7 * t).exp());
        let c = check_envelope(&env, Functional::WL2Sq, 2.0, 0.7, 0.01);
        assert!(c.pass);
        assert!((c.worst_ratio - 1.0).abs() < 1e-12);

        // zero envelope with nonzero functional fails with infinite ratio
        let ones = synthetic(&ts, |_| 1.0);
        let c = check_envelope(&ones, Functional::WL2Sq, 0.0, 1.0, 0.05);
        assert!(!c.pass);
        assert!(c.worst_ratio.is_infinite());
    }

    #[test]
    fn energy_residual_trivial_cases() {
        assert!(matches!(
            energy_identity_residual(&[]),
            Err(Error::EmptySeries)
        ));
        let single = synthetic(&[0.0], |_| 1.0);
        let r = energy_identity_residual(&single).unwrap();
        assert_eq!(r.max_abs, 0.0);
        let zero = synthetic(&[0.0, 1.0], |_| 0.0);
        let r = energy_identity_residual(&zero).unwrap();
        assert_eq!(r.normalized, 0.0);
    }

    #[test]
    fn boundedness_zero_run() {
        let ts: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let zero = synthetic(&ts, |_| 0.0);
        assert!(check_boundedness(&zero, Functional::SecondYz, 0.0).pass);
        assert!(check_gradient_inequality(&zero, 1.0, PI).pass);
    }

    #[test]
    fn record_of_zero_state_is_all_zero() {
        let cfg = SolverConfig {
            params: PhysParams::new(1.0, PI, PI, PI).unwrap(),
            n: [9, 9, 9],
            dt: 0.01,
            t_end: 0.0,
            nonlinear: NonlinearMode::default(),
            forcing: None,
            record_every: 1,
        };
        let solver = Solver::new(cfg).unwrap();
        let g = solver.grid();
        let u0 = Field3::zeros(g, BcTag::DirichletAll);
        let state = solver.init_state(&u0).unwrap();
        let r = record(&state);
        assert_eq!(r.l2_sq, 0.0);
        assert_eq!(r.h2_sq, 0.0);
        assert_eq!(r.ut_w_sq, 0.0);
        assert_eq!(r.second_yz, 0.0);
        assert_eq!(r.trace_xyz, 0.0);
    }

    #[test]
    fn record_l2_consistent_with_grid_norm() {
        let g = make_grid(PI, PI, PI, 13, 13, 13).unwrap();
        let cfg = SolverConfig {
            params: PhysParams::new(1.0, PI, PI, PI).unwrap(),
            n: [13, 13, 13],
            dt: 0.01,
            t_end: 0.0,
            nonlinear: NonlinearMode::default(),
            forcing: None,
            record_every: 1,
        };
        let solver = Solver::new(cfg).unwrap();
        let u0 = make_initial_bump(g, 0.3).unwrap();
        let state = solver.init_state(&u0).unwrap();
        let r = record(&state);
        let direct = crate::grid::norm(&u0, crate::grid::NormKind::L2).powi(2);
        assert_eq!(r.l2_sq, direct);
    }

    #[test]
    fn continuous_dependence_identical_data_is_exactly_zero() {
        let cfg = SolverConfig {
            params: PhysParams::new(1.0, PI, PI, PI).unwrap(),
            n: [11, 11, 11],
            dt: 0.01,
            t_end: 0.05,
            nonlinear: NonlinearMode::default(),
            forcing: None,
            record_every: 1,
        };
        let g = make_grid(PI, PI, PI, 11, 11, 11).unwrap();
        let u0 = make_initial_bump(g, 1e-3).unwrap();
        let r = continuous_dependence(&cfg, &u0, &u0.clone()).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn continuous_dependence_linear_regime_bounded() {
        let cfg = SolverConfig {
            params: PhysParams::new(1.0, PI, PI, PI).unwrap(),
            n: [13, 13, 13],
            dt: 4e-3,
            t_end: 0.5,
            nonlinear: NonlinearMode::default(),
            forcing: None,
            record_every: 10,
        };
        let g = make_grid(PI, PI, PI, 13, 13, 13).unwrap();
        let u0a = make_initial_bump(g, 1e-6).unwrap();
        let u0b = make_initial_bump(g, 1e-6 * (1.0 + 1e-3)).unwrap();
        let r = continuous_dependence(&cfg, &u0a, &u0b).unwrap();
        // the difference obeys the same dissipative linear dynamics
        assert!(r <= 1.0 + 1e-6, "amplification {r}");
        assert!(r > 0.9);
    }
}
