use thiserror::Error;

/// Everything that can go wrong while building operators or evaluating invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("derivative scheme mismatch: {0}")]
    SchemeMismatch(String),
    #[error("patch is not compactly supported: {0}")]
    NotCompactlySupported(String),
    #[error("operator is not of product form near the cut: {0}")]
    NotProductNearCut(String),
    #[error("boundary operator is singular (min |eigenvalue| = {min_abs:e})")]
    SingularBoundaryOperator { min_abs: f64 },
    #[error("operator is not self-adjoint (defect {defect:e}, tolerance {tolerance:e})")]
    NotSelfAdjoint { defect: f64, tolerance: f64 },
    #[error("time must be positive, got {0}")]
    InvalidTime(f64),
    #[error("every eigenvalue lies in the kernel")]
    DegenerateSpectrum,
    #[error("fit is unstable (condition number {condition:e}); shrink K or the fit window")]
    FitUnstable { condition: f64 },
    #[error("s = {s} lies within {distance:e} of a pole at {pole}")]
    NearPole { s: String, pole: f64, distance: f64 },
    #[error("eigenvalue tracking stayed ambiguous near r = {r} at maximal refinement")]
    TrackingFailed { r: f64 },
    #[error("test function support [{lo}, {hi}] does not cover both spectra")]
    SupportTooSmall { lo: f64, hi: f64 },
    #[error("relative trace vanishes identically; no decay to fit")]
    NoSignal,
    #[error("a crossing sits inside the finite-difference stencil at r = {r}")]
    StencilStraddlesCrossing { r: f64 },
    #[error("theta = {0} lies outside (-pi/2, pi/2)")]
    InvalidTheta(f64),
    #[error("operators are incompatible: {0}")]
    Incompatible(String),
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
