use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

/// Failure modes shared by every module of the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("orbit diverged at step {step} (|z| = {modulus:e})")]
    DivergedOrbit { step: usize, modulus: f64 },

    #[error("singular jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:e}, last iterate {last:?})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: [Complex64; 2],
    },

    #[error("derivative vanished at {at}")]
    VanishingDerivative { at: Complex64 },

    #[error("solution has true period {true_period}, not {requested}")]
    PeriodDegenerate { requested: usize, true_period: usize },

    #[error("leading germ coefficient too small (|a| = {modulus:e})")]
    LeadingCoefficientTooSmall { modulus: f64 },

    #[error("not parabolic within tol: {0}")]
    NotParabolic(String),

    #[error("germ is not tangent to the identity (|a_1 - 1| = {deviation:e})")]
    TangencyViolation { deviation: f64 },

    #[error("extrapolation did not converge (last {last}, previous {previous})")]
    ExtrapolationFailed { last: Complex64, previous: Complex64 },

    #[error("point not in petal: {0}")]
    NotInPetal(String),

    #[error("inverse branch: {0}")]
    InverseBranch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("format version mismatch: found {found:?}, expected {expected:?}")]
    VersionMismatch { found: String, expected: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for LabError {
    fn from(err: serde_json::Error) -> Self {
        LabError::Parse(err.to_string())
    }
}
