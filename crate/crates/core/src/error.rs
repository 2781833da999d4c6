use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("diffusion exponent q = {q} outside the admissible range ({lower}, 1)")]
    QOutOfRange { q: f64, lower: f64 },
    #[error("interaction exponent lambda = {lambda} not admissible: {reason}")]
    LambdaOutOfRange { lambda: f64, reason: &'static str },
    #[error("invalid grid: {0}")]
    BadGridSpec(String),
    #[error("non-finite value in angular quadrature at r = {r}, s = {s}")]
    QuadratureFailure { r: f64, s: f64 },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("bracket [{lo}, {hi}] does not straddle the target mass {target}")]
    BracketFailure { lo: f64, hi: f64, target: f64 },
    #[error("gamma function argument {0} is not positive")]
    GammaDomain(f64),
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("bisection for the normalization constant failed: {0}")]
    BisectionFailure(String),
    #[error("time step {dt:e} violates the positivity restriction (max {limit:e})")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("non-finite or non-positive state after a step")]
    NonFiniteState,
    #[error("time step underflow: dt = {0:e}")]
    TimeStepUnderflow(f64),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("need at least {needed} samples in the fit window, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("series contains non-positive values")]
    NonPositiveValues,
    #[error("mass mismatch: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },
    #[error("perturbation has nonzero weighted mean {0:e}")]
    MassNotZero(f64),
    #[error("degenerate weight: {0}")]
    DegenerateWeight(&'static str),
    #[error("profile is identically zero")]
    ZeroProfile,
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("operation requires the {0} variant")]
    WrongVariant(&'static str),
    #[error("mean-field operation requires a kernel matrix")]
    MissingKernel,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
