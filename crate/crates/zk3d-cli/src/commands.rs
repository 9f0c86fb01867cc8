//! The five subcommands. Exit codes: 0 success, 2 input/configuration
//! error, 3 hypothesis-certificate failure, 4 physics-check failure.

use std::path::Path;

use zk3d::{
    check_hypotheses, compute_constants, compute_j0, continuous_dependence, make_grid,
    make_initial_bump, mms_forcing, norm, Axis, C1Convention, Error as ZkError, Field3,
    NonlinearMode, NormKind, PhysParams, Solver, SolverConfig,
};

use crate::config::{ConfigError, RunConfig, Scenario};
use crate::csvio::series_to_csv;
use crate::summary::{build_summary, to_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;
pub const EXIT_PHYSICS: i32 = 4;

pub enum CmdError {
    Config(String),
    Physics(String),
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e.to_string())
    }
}

impl From<ZkError> for CmdError {
    fn from(e: ZkError) -> Self {
        match &e {
            ZkError::PicardDiverged { .. } | ZkError::SingularSystem { .. } => {
                CmdError::Physics(e.to_string())
            }
            ZkError::AtTime { source, .. } => match **source {
                ZkError::PicardDiverged { .. } | ZkError::SingularSystem { .. } => {
                    CmdError::Physics(e.to_string())
                }
                _ => CmdError::Config(e.to_string()),
            },
            _ => CmdError::Config(e.to_string()),
        }
    }
}

impl CmdError {
    pub fn report(&self) -> i32 {
        match self {
            CmdError::Config(m) => {
                eprintln!("error: {m}");
                EXIT_CONFIG
            }
            CmdError::Physics(m) => {
                eprintln!("physics failure: {m}");
                EXIT_PHYSICS
            }
        }
    }
}

type CmdResult = Result<i32, CmdError>;

/// Initial-data norms for the configured bump, if an amplitude is given.
fn bump_data(cfg: &RunConfig, params: &PhysParams) -> Result<(f64, f64), CmdError> {
    let amplitude = cfg.opt_f64("amplitude")?.unwrap_or(0.0);
    if amplitude == 0.0 {
        return Ok((0.0, 0.0));
    }
    let n = cfg.grid_counts()?;
    let grid = make_grid(params.lx, params.ly, params.lz, n[0], n[1], n[2])
        .map_err(|e| CmdError::Config(e.to_string()))?;
    let u0 = make_initial_bump(grid, amplitude).map_err(|e| CmdError::Config(e.to_string()))?;
    let u0_l2 = norm(&u0, NormKind::L2);
    let j0 = compute_j0(&u0, params)?;
    Ok((u0_l2, j0))
}

pub fn cmd_check(config_path: &Path) -> CmdResult {
    let cfg = RunConfig::load(config_path)?;
    let params = cfg.phys_params()?;
    let convention = cfg.c1_convention()?;
    let (u0_l2, j0) = bump_data(&cfg, &params)?;
    let c = compute_constants(&params, u0_l2, convention)?;
    let c_other = compute_constants(
        &params,
        u0_l2,
        match convention {
            C1Convention::TheoremStatement => C1Convention::EstimateIii,
            C1Convention::EstimateIii => C1Convention::TheoremStatement,
        },
    )?;
    let (c1_ts, c1_e3) = match convention {
        C1Convention::TheoremStatement => (c.c1, c_other.c1),
        C1Convention::EstimateIii => (c_other.c1, c.c1),
    };
    let cert = check_hypotheses(&c, params.c_s, u0_l2, j0)?;
    println!("K1  = {:.17e}", c.k1);
    println!("K2  = {:.17e}", c.k2);
    println!("K3  = {:.17e}  (convention: {:?})", c.k3, c.convention);
    println!("K4  = {:.17e}", c.k4);
    println!("C1  = {c1_ts:.17e}  (theorem_statement)");
    println!("C1  = {c1_e3:.17e}  (estimate_iii)");
    println!("chi = {:.17e}", c.chi);
    println!("|u0| = {u0_l2:.17e},  J0 = {j0:.17e}");
    println!(
        "cond_K2  (K2 - 4 c_s)          : margin {:+.6e}  {}",
        cert.cond_k2.margin,
        if cert.cond_k2.pass { "pass" } else { "FAIL" }
    );
    println!(
        "cond_u0  (K2/(4 K3) - |u0|^4)  : margin {:+.6e}  {}",
        cert.cond_u0.margin,
        if cert.cond_u0.pass { "pass" } else { "FAIL" }
    );
    println!(
        "cond_J0  (K2/(4 K4) - J0^2)    : margin {:+.6e}  {}",
        cert.cond_j0.margin,
        if cert.cond_j0.pass { "pass" } else { "FAIL" }
    );
    if cert.overall {
        println!("certificate: PASS");
        Ok(EXIT_OK)
    } else {
        println!("certificate: FAIL");
        Ok(EXIT_CERTIFICATE)
    }
}

fn solver_config(cfg: &RunConfig, forcing: Option<zk3d::MmsForcing>) -> Result<SolverConfig, CmdError> {
    Ok(SolverConfig {
        params: cfg.phys_params()?,
        n: cfg.grid_counts()?,
        dt: cfg.req_f64("dt")?,
        t_end: cfg.req_f64("t_end")?,
        nonlinear: NonlinearMode::default(),
        forcing,
        record_every: cfg.req_usize("record_every")?,
    })
}

pub fn cmd_run(config_path: &Path, out_csv: &Path, out_summary: &Path) -> CmdResult {
    let cfg = RunConfig::load(config_path)?;
    match cfg.scenario()? {
        Some(Scenario::Decay) => {}
        other => {
            return Err(CmdError::Config(format!(
                "run requires `scenario = decay`, got {other:?}"
            )))
        }
    }
    let convention = cfg.c1_convention()?;
    let slack = cfg.opt_f64("slack")?.unwrap_or(0.05);
    let amplitude = cfg.req_f64("amplitude")?;
    let scfg = solver_config(&cfg, None)?;
    let solver = Solver::new(scfg.clone())?;
    let u0 = make_initial_bump(solver.grid(), amplitude)?;
    let (_, series) = solver.run(&u0)?;

    let csv = series_to_csv(&series);
    std::fs::write(out_csv, &csv)
        .map_err(|e| CmdError::Config(format!("cannot write {}: {e}", out_csv.display())))?;
    let summary = build_summary(&scfg.params, convention, slack, &series);
    std::fs::write(out_summary, to_json(&summary))
        .map_err(|e| CmdError::Config(format!("cannot write {}: {e}", out_summary.display())))?;

    println!(
        "wrote {} ({} records) and {}",
        out_csv.display(),
        series.len(),
        out_summary.display()
    );
    if !summary.certificate.overall {
        println!("hypothesis certificate FAILED; theorem-gated checks skipped");
        return Ok(EXIT_CERTIFICATE);
    }
    if summary.checks.all_pass {
        println!("all checks pass");
        Ok(EXIT_OK)
    } else {
        println!("physics check failed (see {})", out_summary.display());
        Ok(EXIT_PHYSICS)
    }
}

pub fn cmd_mms(config_path: &Path) -> CmdResult {
    let cfg = RunConfig::load(config_path)?;
    match cfg.scenario()? {
        Some(Scenario::Mms) => {}
        other => {
            return Err(CmdError::Config(format!(
                "mms requires `scenario = mms`, got {other:?}"
            )))
        }
    }
    let n = cfg.grid_counts()?;
    if n[0] != n[1] || n[0] != n[2] {
        return Err(CmdError::Config(
            "mms ladder requires n_x = n_y = n_z".into(),
        ));
    }
    let n_fine = n[0];
    let steps_fine = n_fine - 1;
    // ladder of 1/2, 3/4 and full resolution; keep only levels with an
    // integer cell count and at least 5 nodes
    let mut ladder = Vec::new();
    if steps_fine % 2 == 0 && steps_fine / 2 + 1 >= 5 {
        ladder.push(steps_fine / 2 + 1);
    }
    if (3 * steps_fine) % 4 == 0 && 3 * steps_fine / 4 + 1 >= 5 {
        ladder.push(3 * steps_fine / 4 + 1);
    }
    ladder.push(n_fine);
    ladder.dedup();
    if ladder.len() < 2 {
        return Err(CmdError::Config(format!(
            "need at least 2 ladder resolutions to form an order, got {ladder:?} from n = {n_fine}"
        )));
    }
    let amplitude = cfg.req_f64("amplitude")?;
    let dt0 = cfg.req_f64("dt")?;
    let t_end = cfg.req_f64("t_end")?;
    let params = cfg.phys_params()?;
    let mms = mms_forcing(amplitude, 1.0);
    let h0 = (ladder[0] - 1) as f64;

    println!("{:>6} {:>12} {:>14}", "n", "dt", "l2_error");
    let mut errs = Vec::new();
    for &nn in &ladder {
        // dt scaled like h^2 so both error components contract together
        let dt = dt0 * (h0 / (nn - 1) as f64).powi(2);
        let scfg = SolverConfig {
            params,
            n: [nn, nn, nn],
            dt,
            t_end,
            nonlinear: NonlinearMode::default(),
            forcing: Some(mms),
            record_every: 1_000_000_000,
        };
        let solver = Solver::new(scfg)?;
        let u0 = mms.solution(solver.grid(), 0.0);
        let (state, _) = solver.run(&u0)?;
        let exact = mms.solution(solver.grid(), state.t);
        let diff = state.u.zip_with(&exact, |a, b| a - b);
        let err = norm(&diff, NormKind::L2);
        println!("{nn:>6} {dt:>12.4e} {err:>14.6e}");
        errs.push(err);
    }
    if errs.iter().all(|&e| e < 1e-14) {
        println!("errors at round-off: manufactured solution reproduced exactly");
        return Ok(EXIT_OK);
    }
    let mut orders = Vec::new();
    for i in 0..errs.len() - 1 {
        let order = (errs[i] / errs[i + 1]).ln()
            / (((ladder[i + 1] - 1) as f64) / ((ladder[i] - 1) as f64)).ln();
        println!(
            "order {} -> {}: {:.3}",
            ladder[i],
            ladder[i + 1],
            order
        );
        orders.push(order);
    }
    let fine = *orders.last().expect("at least one pair");
    if fine >= 1.8 {
        println!("observed order {fine:.3} >= 1.8");
        Ok(EXIT_OK)
    } else {
        println!("observed order {fine:.3} < 1.8");
        Ok(EXIT_PHYSICS)
    }
}

pub fn cmd_ineq(config_path: &Path) -> CmdResult {
    let cfg = RunConfig::load(config_path)?;
    match cfg.scenario()? {
        Some(Scenario::Ineq) => {}
        other => {
            return Err(CmdError::Config(format!(
                "ineq requires `scenario = ineq`, got {other:?}"
            )))
        }
    }
    let params = cfg.phys_params()?;
    let n = cfg.grid_counts()?;
    let seed = cfg
        .opt_u64("seed")?
        .ok_or_else(|| CmdError::Config("missing required key `seed`".into()))?;
    let slack = cfg.opt_f64("slack")?.unwrap_or(5.0);
    let grid = make_grid(params.lx, params.ly, params.lz, n[0], n[1], n[2])
        .map_err(|e| CmdError::Config(e.to_string()))?;
    let samples = 100;
    let mut all_pass = true;
    for axis in [Axis::X, Axis::Y, Axis::Z] {
        let rep = zk3d::steklov_suite(grid, axis, samples, seed, slack)?;
        all_pass &= rep.pass;
        println!(
            "steklov {:?}: worst bound/quotient {:.12} over {} samples (worst id {}) {}",
            axis,
            rep.worst_ratio,
            rep.n_samples,
            rep.worst_sample_id,
            if rep.pass { "pass" } else { "FAIL" }
        );
    }
    for q in [3.0, 4.0] {
        let rep = zk3d::interpolation_suite(grid, q, samples, seed)?;
        all_pass &= rep.pass;
        println!(
            "interpolation q={q}: worst ratio {:.12} over {} samples (worst id {}) {}",
            rep.worst_ratio,
            rep.n_samples,
            rep.worst_sample_id,
            if rep.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_PHYSICS })
}

pub fn cmd_compare(config_path: &Path) -> CmdResult {
    let cfg = RunConfig::load(config_path)?;
    match cfg.scenario()? {
        Some(Scenario::Compare) => {}
        other => {
            return Err(CmdError::Config(format!(
                "compare requires `scenario = compare`, got {other:?}"
            )))
        }
    }
    let amplitude = cfg.req_f64("amplitude")?;
    let scfg = solver_config(&cfg, None)?;
    let grid = scfg.grid().map_err(|e| CmdError::Config(e.to_string()))?;
    let base = make_initial_bump(grid, amplitude)?;

    // identical-data control: bit-identical trajectories, amplification 0
    let zero = continuous_dependence(&scfg, &base, &base.clone())?;
    println!("delta 0e0: amplification {zero:.6e}");

    let deltas = [1e-2, 1e-3, 1e-4];
    let mut ratios = Vec::new();
    for &d in &deltas {
        let pert: Field3 = make_initial_bump(grid, amplitude * (1.0 + d))?;
        let r = continuous_dependence(&scfg, &base, &pert)?;
        println!("delta {d:.0e}: amplification {r:.6e}");
        ratios.push(r);
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
    let spread = hi / lo;
    println!("ladder spread {spread:.4}");
    Ok(if zero == 0.0 && spread <= 2.0 {
        EXIT_OK
    } else {
        EXIT_PHYSICS
    })
}
