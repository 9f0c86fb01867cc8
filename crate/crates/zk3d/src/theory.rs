//! Explicit constants of the decay theorem, hypothesis certification and
//! decay envelopes.
//!
//! The constant C_1 has two printed conventions (the theorem statement and
//! the 2/5-scaled value derived in the gradient estimate); both are exposed
//! and the caller picks one.

use crate::error::{Error, Result};
use crate::grid::{deriv, laplacian, weighted_l2_sq, Axis, BcTag, Field3};

/// Physical parameters: sound speed and box dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub c_s: f64,
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
}

impl PhysParams {
    pub fn new(c_s: f64, lx: f64, ly: f64, lz: f64) -> Result<PhysParams> {
        for (name, v) in [("c_s", c_s), ("L", lx), ("B_y", ly), ("B_z", lz)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(PhysParams { c_s, lx, ly, lz })
    }
}

/// Which printed form of C_1 to use when building K_3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C1Convention {
    /// C_1 = 1 + c_s + (2^11 / 3) |u_0|^4, as in the theorem statement.
    TheoremStatement,
    /// C_1 = (2/5) (1 + c_s + (2^11 / 3) |u_0|^4), as derived in the
    /// gradient estimate.
    EstimateIii,
}

/// All explicit constants of the theorem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub c1: f64,
    pub chi: f64,
    pub convention: C1Convention,
}

/// Evaluate the constants for given parameters and initial-data L2 norm.
pub fn compute_constants(
    p: &PhysParams,
    u0_l2: f64,
    convention: C1Convention,
) -> Result<TheoryConstants> {
    if !(u0_l2.is_finite() && u0_l2 >= 0.0) {
        return Err(Error::Validation(format!("u0_l2 must be >= 0, got {u0_l2}")));
    }
    let pi2 = std::f64::consts::PI.powi(2);
    let k1 = 2f64.powi(17) / 3.0;
    let k2 = pi2
        * (7.0 / (8.0 * p.ly * p.ly) + 7.0 / (8.0 * p.lz * p.lz) + 23.0 / (8.0 * p.lx * p.lx));
    let c1_base = 1.0 + p.c_s + 2f64.powi(11) / 3.0 * u0_l2.powi(4);
    let c1 = match convention {
        C1Convention::TheoremStatement => c1_base,
        C1Convention::EstimateIii => 0.4 * c1_base,
    };
    let one_l = 1.0 + p.lx;
    let k3 = 27.0 * 2f64.powi(16) * one_l.powi(4) * (2.0 * c1 * c1 + 1.0);
    let k4 = 27.0 * 2f64.powi(19) / 25.0 * one_l.powi(6);
    let chi = k2 / (4.0 * one_l);
    Ok(TheoryConstants {
        k1,
        k2,
        k3,
        k4,
        c1,
        chi,
        convention,
    })
}

/// One hypothesis with its signed margin (>= 0 means satisfied).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub margin: f64,
    pub pass: bool,
}

impl ConditionCheck {
    fn from_margin(margin: f64) -> ConditionCheck {
        ConditionCheck {
            margin,
            pass: margin >= 0.0,
        }
    }
}

/// The three hypotheses of the theorem with signed margins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisCertificate {
    /// K_2 - 4 c_s
    pub cond_k2: ConditionCheck,
    /// K_2 / (4 K_3) - |u_0|^4
    pub cond_u0: ConditionCheck,
    /// K_2 / (4 K_4) - J_0^2
    pub cond_j0: ConditionCheck,
    pub overall: bool,
}

/// Evaluate the three hypothesis inequalities exactly, with signed margins.
pub fn check_hypotheses(
    c: &TheoryConstants,
    c_s: f64,
    u0_l2: f64,
    j0: f64,
) -> Result<HypothesisCertificate> {
    for (name, v) in [("c_s", c_s), ("u0_l2", u0_l2), ("J0", j0)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Validation(format!(
                "{name} must be finite and >= 0, got {v}"
            )));
        }
    }
    let cond_k2 = ConditionCheck::from_margin(c.k2 - 4.0 * c_s);
    let cond_u0 = ConditionCheck::from_margin(c.k2 / (4.0 * c.k3) - u0_l2.powi(4));
    let cond_j0 = ConditionCheck::from_margin(c.k2 / (4.0 * c.k4) - j0 * j0);
    Ok(HypothesisCertificate {
        cond_k2,
        cond_u0,
        cond_j0,
        overall: cond_k2.pass && cond_u0.pass && cond_j0.pass,
    })
}

/// Tolerance for the discrete compatibility condition u0_x(L,.,.) = 0:
/// a second-order scheme cannot distinguish residuals below ~10 h_x^2
/// times the gradient scale of the data.
pub fn compatibility_tolerance(u0: &Field3) -> f64 {
    let hx = u0.grid.h[0];
    let mut grad_scale: f64 = 0.0;
    for axis in Axis::ALL {
        let d = deriv(u0, axis);
        for &v in d.values() {
            grad_scale = grad_scale.max(v.abs());
        }
    }
    10.0 * hx * hx * grad_scale
}

/// Max over the x = L face of the one-sided discrete x-derivative.
pub fn compatibility_residual(u0: &Field3) -> f64 {
    let g = u0.grid;
    let nx = g.n[0];
    let hx = g.h[0];
    let mut worst: f64 = 0.0;
    for k in 0..g.n[2] {
        for j in 0..g.n[1] {
            let d = (3.0 * u0.at(nx - 1, j, k) - 4.0 * u0.at(nx - 2, j, k)
                + u0.at(nx - 3, j, k))
                / (2.0 * hx);
            worst = worst.max(d.abs());
        }
    }
    worst
}

/// Check u0 against both compatibility conditions of the theorem.
pub fn check_compatibility(u0: &Field3) -> Result<()> {
    if u0.bc() != BcTag::DirichletAll {
        return Err(Error::Validation(
            "initial data must carry the dirichlet_all tag".into(),
        ));
    }
    let residual = compatibility_residual(u0);
    let tolerance = compatibility_tolerance(u0);
    if residual > tolerance {
        return Err(Error::Incompatible {
            residual,
            tolerance,
        });
    }
    Ok(())
}

/// The initial-data functional J_0 = ((1+x), u_0^2 + [(c_s+u_0)u_0x + Lap u_0x]^2).
///
/// Derivatives are taken with the grid operators, composed exactly as the
/// diagnostics compute u_t, so J_0 equals ((1+x),u_0^2) + ((1+x),u_t^2)(0)
/// to the last bit.
pub fn compute_j0(u0: &Field3, p: &PhysParams) -> Result<f64> {
    check_compatibility(u0)?;
    let u0x = deriv(u0, Axis::X);
    let lap_u0x = laplacian(&u0x);
    let g = u0
        .zip_with(&u0x, |u, ux| (p.c_s + u) * ux)
        .zip_with(&lap_u0x, |a, b| a + b);
    Ok(weighted_l2_sq(u0) + weighted_l2_sq(&g))
}

/// initial_value * exp(-rate * t). Callers pass 2*chi for the weighted-L2
/// envelope and chi for the u_t and H2 envelopes.
pub fn decay_envelope(initial_value: f64, rate: f64, t: f64) -> Result<f64> {
    if !(initial_value.is_finite() && initial_value >= 0.0) {
        return Err(Error::Validation(format!(
            "initial_value must be >= 0, got {initial_value}"
        )));
    }
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::Validation(format!("rate must be >= 0, got {rate}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Validation(format!("t must be >= 0, got {t}")));
    }
    Ok(initial_value * (-rate * t).exp())
}
