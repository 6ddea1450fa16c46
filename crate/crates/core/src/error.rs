use thiserror::Error;

/// Errors produced by the design and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the valid range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid poling order {0}; must be positive")]
    InvalidOrder(i64),

    #[error("singular coupling ratio: {0}")]
    SingularRatio(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error(
        "total round-trip loss {loss} is outside the small-loss regime (0, 0.5); \
         use an exact photon-lifetime treatment instead"
    )]
    LossRegime { loss: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("no conversion: nonlinear coupling g is zero")]
    NoConversion,

    #[error("insufficient sampling: {0}")]
    Sampling(String),

    #[error("no resonance dip found above {threshold:.3e} below baseline")]
    NoDip { threshold: f64 },

    #[error("found {count} resonance dips where exactly one was expected")]
    MultipleDips { count: usize },

    #[error("integration did not converge after {steps} steps (relative rate {residual:.3e})")]
    Convergence { steps: usize, residual: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
