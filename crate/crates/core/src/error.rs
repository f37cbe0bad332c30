use thiserror::Error;

/// Rejection of a raw parameter tuple.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("drift {name} must be positive, got {value}")]
    NonPositiveDrift { name: &'static str, value: f64 },
    #[error("correlation rho must lie in (-1, 1), got {rho}")]
    CorrelationOutOfRange { rho: f64 },
    #[error("reflection slope {name} must be positive, got {value}")]
    NonPositiveReflection { name: &'static str, value: f64 },
    #[error("reflection product r1*r2 must be at least 1, got {product}")]
    ReflectionProductBelowOne { product: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("point {re}+{im}i lies on a branch cut")]
    OnBranchCut { re: f64, im: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GluingError {
    #[error("argument {z} lies on the cut (-inf, -1]")]
    OnCut { z: f64 },
    #[error("W has a pole at x = 0")]
    PoleAtZero,
}

/// Failures of the transform evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BvpError {
    #[error("psi1 has a pole at x = 0")]
    PoleAtZero,
    #[error("psi1 has a pole at x1 = {x1}")]
    PoleAtX1 { x1: f64 },
    #[error("point {re}+{im}i is outside the analyticity domain")]
    OutsideDomain { re: f64, im: f64 },
    #[error("point {re}+{im}i is too close to the contour")]
    NearContour { re: f64, im: f64 },
    #[error("argument tracking failed on y in [{y_lo}, {y_hi}]")]
    ArgTrackingFailed { y_lo: f64, y_hi: f64 },
    #[error("division by a near-zero kernel coefficient at y = {y}")]
    DivisionNearZero { y: f64 },
    #[error("kernel vanishes at ({x_re}+{x_im}i, {y_re}+{y_im}i)")]
    KernelZero { x_re: f64, x_im: f64, y_re: f64, y_im: f64 },
    #[error("quadrature did not reach tolerance (estimate {estimate:e})")]
    QuadratureFailed { estimate: f64 },
    #[error(transparent)]
    Gluing(#[from] GluingError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InversionError {
    #[error("Euler summation did not settle at u = {u} (spread {spread:e})")]
    InversionUnstable { u: f64, spread: f64 },
    #[error("invalid inversion input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Transform(#[from] BvpError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("all {n_paths} paths were censored")]
    AllCensored { n_paths: u64 },
    #[error("linear solver stopped at residual {residual:e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },
    #[error("invalid oracle configuration: {0}")]
    InvalidConfig(String),
}
