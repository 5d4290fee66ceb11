use thiserror::Error;

/// Crate-wide error type. Variants are grouped by the subsystem that raises
/// them; the CLI maps them onto process exit codes (config and validation
/// problems exit 2, I/O problems exit 3).
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received parameters outside its contract.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A spatial point lies outside the closed unit square.
    #[error("point ({0}, {1}) lies outside the unit square")]
    OutsideDomain(f64, f64),

    /// A density derivative was requested at a gradient where the integrand
    /// is not smooth enough. Regularize (mu > 0) or evaluate at z != 0.
    #[error("integrand not differentiable at z = 0 for {family} with mu = {mu}; regularize first")]
    SingularAtZero { family: &'static str, mu: f64 },

    /// The Hessian (or its coercive floor) fails positive definiteness.
    #[error("degenerate hessian: smallest eigenvalue {0:e} is not above 1e-12")]
    DegenerateHessian(f64),

    /// Grid construction or field/grid shape mismatch.
    #[error("grid error: {0}")]
    Grid(String),

    /// A difference offset does not fit inside the sampled cell array.
    #[error("offset ({0}, {1}) does not fit inside the cell array")]
    OffsetOutOfRange(i64, i64),

    /// Claim-diagram structural errors (duplicates, cycles, partial maps).
    #[error("claim diagram error: {0}")]
    Dag(String),

    /// Configuration file rejected (syntax, unknown keys, invariants).
    #[error("config error: {0}")]
    Config(String),

    /// Line-oriented input could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn dag(msg: impl Into<String>) -> Self {
        Error::Dag(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn grid(msg: impl Into<String>) -> Self {
        Error::Grid(msg.into())
    }

    /// Exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Parse { .. } => 2,
            Error::Io(_) => 3,
            _ => 1,
        }
    }
}
