use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("semi-infinite integral needs a positive decay rate, got {0}")]
    NonPositiveDecay(f64),
    #[error("invalid bracket [{lo}, {hi}] with values {f_lo}, {f_hi}")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("mass matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("shifted matrix stayed singular after perturbation")]
    SingularShift,
    #[error("gamma function pole at {0}")]
    PoleAtNonPositiveInteger(f64),
    #[error("hypergeometric series did not converge within {terms} terms")]
    SeriesNonConvergence { terms: usize },
    #[error("hypergeometric parameter c = {0} is a non-positive integer")]
    InvalidHypergeometric(f64),
    #[error("argument {0} outside the supported domain")]
    ArgumentOutOfDomain(f64),
    #[error("invalid problem dimensions n = {n}, k = {k}")]
    InvalidDims { n: u32, k: u32 },
    #[error("ball radius must lie in (0, 1), got {0}")]
    InvalidBall(f64),
    #[error("point lies outside the unit ball")]
    PointOutsideModel,
    #[error("grid too coarse: need at least {needed} nodes, got {got}")]
    GridTooCoarse { needed: usize, got: usize },
    #[error("grid must be uniform and strictly increasing")]
    NonUniformGrid,
    #[error("dimension n = {n} outside the admissible range for k = {k}")]
    DimensionOutOfRange { n: u32, k: u32 },
    #[error("exponent {0} outside (0, n)")]
    ExponentOutOfRange(f64),
    #[error("denominator non-positive: lambda = {lambda} is not below {bound}")]
    DenominatorNonPositive { lambda: f64, bound: f64 },
    #[error("lambda = {0} is not below the spectral bottom 1/4 of P1")]
    SpectralBottomViolation(f64),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(u32),
    #[error("complex factorization roots are not supported (k = {0})")]
    ComplexRootsUnsupported(u32),
    #[error("lambda = {0} outside the supported range")]
    LambdaOutOfRange(f64),
    #[error("transform tail too heavy: relative tail {0:e}")]
    TailTooHeavy(f64),
    #[error("no root found: {0}")]
    NoRootFound(String),
    #[error("no solution found: {0}")]
    NotFound(String),
    #[error("shot from a = {a}, b = {b} blew up before the boundary")]
    BlowUp { a: f64, b: f64 },
    #[error("Pohozaev identity is implemented for even k only")]
    OddOrderUnsupported,
    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
