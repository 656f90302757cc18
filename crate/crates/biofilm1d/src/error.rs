//! Error type shared by all solvers.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input: non-finite or non-positive parameters, grids that are
    /// too coarse, mismatched lengths, unparsable specifications.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A precondition of the requested operation does not hold for this model
    /// (e.g. the shooting machinery requires an affine growth law and a
    /// strictly increasing consumption rate).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative solve ran out of iterations before reaching tolerance.
    #[error("{context}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    IterationFailure {
        context: String,
        iterations: usize,
        residual: f64,
    },

    /// The adaptive step controller drove the step below the representable
    /// floor, usually a sign of a non-smooth or inconsistent right-hand side.
    #[error("step size underflow at t = {t:.6e} (dt = {dt:.3e})")]
    StepSizeUnderflow { t: f64, dt: f64 },

    /// A state left the region the continuous problem confines it to by more
    /// than the allowed discretization slack.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Configuration file or command-line parsing failure.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
