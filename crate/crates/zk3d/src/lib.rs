//! Simulator and verification harness for the 3D Zakharov-Kuznetsov
//! initial-boundary value problem on a box: IMEX Crank-Nicolson solver,
//! explicit theorem constants with hypothesis certification, functional
//! diagnostics against the proven energy identity and decay envelopes, and
//! randomized suites for the Steklov and interpolation inequalities.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod ineq;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
pub use grid::{
    deriv, integrate, laplacian, make_grid, norm, second_deriv, trace_x0_sq, weighted_l2_sq,
    Axis, BcTag, Field3, Grid3, NormKind,
};
pub use theory::{
    check_compatibility, check_hypotheses, compute_constants, compute_j0, decay_envelope,
    C1Convention, HypothesisCertificate, PhysParams, TheoryConstants,
};
pub use solver::{
    compute_ut, make_initial_bump, mms_forcing, MmsForcing, NonlinearMode, SimState, Solver,
    SolverConfig,
};
pub use diagnostics::{
    check_boundedness, check_envelope, check_gradient_inequality, continuous_dependence,
    energy_identity_residual, fit_decay_rate, record, DecayFit, DiagnosticsRecord, Functional,
};
pub use ineq::{
    interpolation_ratio, interpolation_suite, random_sine_field, steklov_ratio, steklov_suite,
    theta, IneqReport,
};
