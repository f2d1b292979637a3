use thiserror::Error;

/// Errors raised across the crate. Each variant corresponds to a named
/// failure condition of one of the operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("p = {p} and q = {q} are not coprime")]
    NonCoprime { p: String, q: String },

    #[error("sigma = {0} is outside the open interval (1/4, 1/2)")]
    BadSigma(String),

    #[error("strict mode: {0}")]
    StrictViolation(String),

    #[error("missing norm estimate: {0}")]
    MissingEstimate(String),

    #[error("no mixing time m <= {q_next} exists")]
    NoMixingTime { q_next: String },

    #[error("numeric underflow: {0} (switch to exact indexing)")]
    NumericUnderflow(String),

    #[error("singular derivative (|det| = {0:e})")]
    SingularDeriv(f64),

    #[error("finite-difference stencil touches a transition collar")]
    InTransition,

    #[error("alpha_next denominator {got} disagrees with the scheduled q_next = {expected}")]
    InconsistentParams { expected: String, got: String },

    #[error("quadrature did not converge: {0}")]
    QuadratureUnconverged(String),

    #[error("strip norm overflows at rho = {rho}, degree = {degree}")]
    Overflow { rho: f64, degree: usize },

    #[error("no GOOD samples in cell")]
    NoGoodSamples,

    #[error("evaluation of the inverse is not GOOD at the requested point")]
    TransitionAtPoint,

    #[error("stratum {stratum} has only {good} GOOD samples (need >= {needed})")]
    InsufficientSamples { stratum: String, good: usize, needed: usize },

    #[error("loss budget {loss:.4} exceeds the cap {cap:.4}")]
    BudgetExceeded { loss: f64, cap: f64 },

    #[error("finite-difference norms support order <= 3, got {0}")]
    NormOrderTooHigh(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericUnderflow(_)
            | Error::SingularDeriv(_)
            | Error::QuadratureUnconverged(_)
            | Error::Overflow { .. } => 4,
            Error::Assertion(_)
            | Error::BudgetExceeded { .. }
            | Error::NoGoodSamples
            | Error::InsufficientSamples { .. }
            | Error::InTransition
            | Error::TransitionAtPoint
            | Error::NoMixingTime { .. } => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
