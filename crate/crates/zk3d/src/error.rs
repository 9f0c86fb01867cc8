use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received parameters outside its domain.
    #[error("invalid input: {0}")]
    Validation(String),

    /// Initial data violates the compatibility conditions u0|_boundary = 0,
    /// u0_x(L,.,.) = 0 (discretely, up to the scheme tolerance).
    #[error("incompatible initial data: max |u_x(L,y,z)| = {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Incompatible { residual: f64, tolerance: f64 },

    /// The Picard iteration did not reach its tolerance within max_iter.
    #[error("Picard iteration diverged at t = {t}: residual history {history:?}")]
    PicardDiverged { t: f64, history: Vec<f64> },

    /// A per-mode linear system factorization hit a zero pivot.
    #[error("singular implicit system for transverse mode ({mode_y}, {mode_z})")]
    SingularSystem { mode_y: usize, mode_z: usize },

    /// A solver error with the failing simulation time attached.
    #[error("solver failed at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    /// A decay-rate fit was requested on nonpositive data.
    #[error("nonpositive values in fit window at t = {times:?}")]
    NonpositiveInWindow { times: Vec<f64> },

    /// An analysis routine received an empty diagnostics series.
    #[error("empty diagnostics series")]
    EmptySeries,
}

pub type Result<T> = std::result::Result<T, Error>;
