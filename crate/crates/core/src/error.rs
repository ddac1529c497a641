use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A block of a system description has the wrong shape.
    #[error("dimension mismatch in {block}: expected {expected}, got {actual}")]
    Dimension { block: String, expected: String, actual: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `sE - A(s)` is numerically singular at the evaluation point.
    #[error("evaluation point {s} is too close to a characteristic root (rcond = {rcond:.3e})")]
    PoleProximity { s: Complex64, rcond: f64 },

    /// `U^T A_0 V` is singular, so the descriptor system is not causal.
    #[error("system is not causal: U^T A0 V is singular (rcond = {rcond:.3e})")]
    NotCausal { rcond: f64 },

    /// A pole of the approximating system lies on the imaginary axis.
    #[error("stability violation: pole {pole} lies on the imaginary axis")]
    StabilityViolation { pole: Complex64 },

    /// The asymptotic pencil is singular for some delay angle, so the
    /// asymptotic norm is unbounded.
    #[error("asymptotic transfer function is unbounded: singular pencil at theta = {theta:?}")]
    AsymptoticUnbounded { theta: Vec<f64> },

    #[error("{active} active delays exceed the gridding limit of {limit}; set an explicit grid density override")]
    TooManyActiveDelays { active: usize, limit: usize },

    #[error("generalized eigensolver failed on a {size}x{size} pencil: {reason}")]
    Eigensolver { size: usize, reason: String },

    #[error("zero-pole-gain extraction failed: {0}")]
    ZpkExtraction(String),
}
