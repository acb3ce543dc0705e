use thiserror::Error;

/// Errors raised anywhere in the discretization, linear-algebra and
/// time-stepping layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("weighting function must be positive, got λ({t}) = {value}")]
    NonPositiveWeight { t: f64, value: f64 },

    #[error("weighting function must be non-increasing, λ({t0}) = {v0} < λ({t1}) = {v1}")]
    IncreasingWeight { t0: f64, v0: f64, t1: f64, v1: f64 },

    #[error("diffusion coefficient must be positive and finite, got ξ({x}, {t}) = {value}")]
    InvalidDiffusion { x: f64, t: f64, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not reach tolerance on [{a}, {b}] (estimated error {estimate:e})")]
    QuadratureFailed { a: f64, b: f64, estimate: f64 },

    #[error("sum-of-exponentials approximation could not be certified to ε = {epsilon:e} (best sampled error {best:e})")]
    SoeNotCertified { epsilon: f64, best: f64 },

    #[error("skew-circulant preconditioner is singular at mode {mode} (|λ| = {magnitude:e})")]
    SingularPreconditioner { mode: usize, magnitude: f64 },

    #[error("zero pivot at row {row} during LU factorization")]
    SingularPivot { row: usize },

    #[error("Gohberg–Semencul formula not applicable: {0}")]
    GsfNotApplicable(&'static str),

    #[error("fast scheme requires a tempered weighting λ(t) = exp(-bt)")]
    FastSchemeRequiresTempered,

    #[error("linear solve failed at time level {level}: {reason}")]
    LinearSolveFailed { level: usize, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
