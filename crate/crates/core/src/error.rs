use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("no sign change on the equilibrium bracket ({lo:e}, {hi:e})")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("singular Newton Jacobian at omega={omega}, tau={tau}")]
    SingularJacobian { omega: f64, tau: f64 },

    #[error("no Hopf candidates found: {0}")]
    EmptyResult(String),

    #[error("Hopf certificate failed: |Delta(i omega, tau)| = {residual:e} at omega={omega}, tau={tau}")]
    CertificateFailed { omega: f64, tau: f64, residual: f64 },

    #[error("degenerate root: M1^2 + M2^2 = {0:e}")]
    DegenerateRoot(f64),

    #[error("singular matrix: pivot {pivot:e} in column {column}")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("degenerate eigenvector normalization: |eta| = {0:e}")]
    DegenerateEigenvector(f64),

    #[error("transversality coefficient M vanishes")]
    TransversalityZero,

    #[error("history record does not cover t = {requested} (earliest {earliest})")]
    HistoryUnderflow { requested: f64, earliest: f64 },

    #[error("non-finite state at t = {0}")]
    NonFiniteState(f64),

    #[error("step dt = {dt} exceeds tau/4 = {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
}
