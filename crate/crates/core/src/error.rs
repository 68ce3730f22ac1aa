//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A norm grading index fell outside `[0, s_max]`.
    #[error("grading index s = {s} outside [0, {s_max}]")]
    GradingOutOfRange { s: f64, s_max: f64 },

    /// Projector cutoffs must satisfy `lambda >= 1`.
    #[error("projector cutoff must satisfy lambda >= 1, got {0}")]
    CutoffBelowOne(f64),

    /// A ratio against the zero vector is undefined.
    #[error("ratio undefined for the zero vector")]
    ZeroVector,

    /// A mode index fell outside the spectral truncation.
    #[error("mode {0} outside the spectral truncation")]
    ModeOutOfRange(i64),

    /// Two vectors built over different scale specs were combined.
    #[error("mismatched scale specs")]
    SpecMismatch,

    /// The requested target lies outside the admissible ball.
    #[error("target norm {norm:.6e} is not inside the admissible radius {radius:.6e}")]
    OutOfRadius { norm: f64, radius: f64 },

    /// An iterate left the domain ball during the flow.
    #[error("iterate left the ball of radius {radius:.6e}")]
    RadiusBreach { radius: f64 },

    /// A point in the domain ball was required.
    #[error("point norm {norm:.6e} outside the open ball of radius {radius:.6e}")]
    OutOfBall { norm: f64, radius: f64 },

    /// A path segment is too long for the local admissible radius.
    #[error("path segment {segment}: gap {gap:.6e} exceeds the admissible {limit:.6e}; refine the path")]
    PathRefinement {
        segment: usize,
        gap: f64,
        limit: f64,
    },

    /// The approximate-inverse series grows along the applied direction.
    #[error("Neumann series diverges along the applied direction (first-term ratio {0:.3e}); nonlinearity too strong for this cutoff")]
    NeumannDivergence(f64),

    /// A multilevel stage failed to converge.
    #[error("level {n} failed: {reason}")]
    LevelFailure { n: usize, reason: String },

    /// The independent scalar/root oracle did not converge.
    #[error("oracle failure: {0}")]
    OracleFailure(String),

    /// A configuration file or value was rejected.
    #[error("config error: {0}")]
    Config(String),

    /// A direct argument violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    ///
    /// 2 config error, 3 out-of-radius (including radius breaches),
    /// 4 non-convergence, 5 oracle failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 2,
            Error::OutOfRadius { .. } | Error::RadiusBreach { .. } | Error::OutOfBall { .. } => 3,
            Error::PathRefinement { .. } | Error::LevelFailure { .. } => 4,
            Error::NeumannDivergence(_) => 4,
            Error::OracleFailure(_) => 5,
            _ => 1,
        }
    }
}
