//! Numerical property suites for the two preliminary inequalities: the
//! Steklov/Poincare lower bounds on directional Rayleigh quotients and the
//! interpolation inequality |u|_{L^q} <= 4^theta |grad u|^theta |u|^(1-theta)
//! with theta = 3(1/2 - 1/q).
//!
//! Random fields are sums of up to five tensor sine modes with coefficients
//! from a fixed-seed generator: zero boundary data by construction, smooth,
//! reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{deriv, norm, Axis, BcTag, Field3, Grid3, NormKind};

/// theta(q) = 3 (1/2 - 1/q), defined for 2 <= q <= 6.
pub fn theta(q: f64) -> Result<f64> {
    if !(2.0..=6.0).contains(&q) {
        return Err(Error::Validation(format!(
            "q must lie in [2, 6] (theta in [0, 1]), got {q}"
        )));
    }
    Ok(3.0 * (0.5 - 1.0 / q))
}

/// Rayleigh quotient |d_axis f|^2 / |f|^2 for a zero-boundary field.
pub fn steklov_ratio(f: &Field3, axis: Axis) -> Result<f64> {
    if f.bc() != BcTag::DirichletAll {
        return Err(Error::Validation(
            "steklov ratio requires a dirichlet_all field".into(),
        ));
    }
    let denom = norm(f, NormKind::L2).powi(2);
    if denom == 0.0 {
        return Err(Error::Validation("steklov ratio of the zero field".into()));
    }
    let d = deriv(f, axis);
    Ok(norm(&d, NormKind::L2).powi(2) / denom)
}

/// |f|_{L^q} / (4^theta |grad f|^theta |f|^(1-theta)) for q in {2, 3, 4}.
pub fn interpolation_ratio(f: &Field3, q: f64) -> Result<f64> {
    if f.bc() != BcTag::DirichletAll {
        return Err(Error::Validation(
            "interpolation ratio requires a dirichlet_all field".into(),
        ));
    }
    let kind = if q == 2.0 {
        NormKind::L2
    } else if q == 3.0 {
        NormKind::L3
    } else if q == 4.0 {
        NormKind::L4
    } else {
        return Err(Error::Validation(format!("q must be one of 2, 3, 4, got {q}")));
    };
    let l2 = norm(f, NormKind::L2);
    if l2 == 0.0 {
        return Err(Error::Validation(
            "interpolation ratio of the zero field".into(),
        ));
    }
    let th = theta(q)?;
    let mut grad_sq = 0.0;
    for axis in Axis::ALL {
        grad_sq += norm(&deriv(f, axis), NormKind::L2).powi(2);
    }
    let grad = grad_sq.sqrt();
    let lhs = norm(f, kind);
    let rhs = 4f64.powf(th) * grad.powf(th) * l2.powf(1.0 - th);
    Ok(lhs / rhs)
}

/// Draw one random zero-boundary field: up to five tensor sine modes with
/// mode numbers 1..=4 per axis and coefficients in (-1, 1).
pub fn random_sine_field(grid: Grid3, rng: &mut ChaCha8Rng) -> Field3 {
    let n_terms = rng.gen_range(1..=5usize);
    let mut terms = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let c: f64 = rng.gen_range(-1.0..1.0);
        let mx = rng.gen_range(1..=4usize) as f64;
        let my = rng.gen_range(1..=4usize) as f64;
        let mz = rng.gen_range(1..=4usize) as f64;
        terms.push((c, mx, my, mz));
    }
    let pi = std::f64::consts::PI;
    let (lx, ly, lz) = (grid.len[0], grid.len[1], grid.len[2]);
    Field3::from_fn(grid, BcTag::DirichletAll, move |x, y, z| {
        terms
            .iter()
            .map(|&(c, mx, my, mz)| {
                c * (mx * pi * x / lx).sin() * (my * pi * y / ly).sin() * (mz * pi * z / lz).sin()
            })
            .sum()
    })
    .expect("sine sums are finite")
}

/// Result of one randomized suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IneqReport {
    pub n_samples: usize,
    /// lhs/rhs of the inequality, maximized over samples
    pub worst_ratio: f64,
    pub worst_sample_id: usize,
    /// pass threshold: worst_ratio <= 1 + tolerance
    pub tolerance: f64,
    pub pass: bool,
}

/// Steklov suite along one axis: asserts every Rayleigh quotient stays
/// above (pi^2 / side^2)(1 - slack_coeff h^2). The reported ratio is
/// bound / quotient, so values above 1 are violations.
pub fn steklov_suite(
    grid: Grid3,
    axis: Axis,
    n_samples: usize,
    seed: u64,
    slack_coeff: f64,
) -> Result<IneqReport> {
    if n_samples == 0 {
        return Err(Error::Validation("n_samples must be >= 1".into()));
    }
    let ax = match axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    };
    let side = grid.len[ax];
    let h = grid.h[ax];
    let pi = std::f64::consts::PI;
    let bound = (pi * pi / (side * side)) * (1.0 - slack_coeff * h * h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_id = 0;
    for id in 0..n_samples {
        let f = random_sine_field(grid, &mut rng);
        let q = steklov_ratio(&f, axis)?;
        let r = bound / q;
        if r > worst {
            worst = r;
            worst_id = id;
        }
    }
    Ok(IneqReport {
        n_samples,
        worst_ratio: worst,
        worst_sample_id: worst_id,
        tolerance: 0.0,
        pass: worst <= 1.0,
    })
}

/// Interpolation suite for one exponent q.
pub fn interpolation_suite(
    grid: Grid3,
    q: f64,
    n_samples: usize,
    seed: u64,
) -> Result<IneqReport> {
    if n_samples == 0 {
        return Err(Error::Validation("n_samples must be >= 1".into()));
    }
    let tolerance = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_id = 0;
    for id in 0..n_samples {
        let f = random_sine_field(grid, &mut rng);
        let r = interpolation_ratio(&f, q)?;
        if r > worst {
            worst = r;
            worst_id = id;
        }
    }
    Ok(IneqReport {
        n_samples,
        worst_ratio: worst,
        worst_sample_id: worst_id,
        tolerance,
        pass: worst <= 1.0 + tolerance,
    })
}
