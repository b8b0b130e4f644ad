use thiserror::Error;

/// Errors shared across the geometry, solver, capacity, and report layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("set does not intersect the grid interior")]
    EmptySet,

    #[error("set is not compactly contained in the domain (needs a {margin:.4} clearance, worst node at distance {worst:.4})")]
    NotCompactlyContained { margin: f64, worst: f64 },

    #[error("1-d measure is only defined for unions of real segments: {0}")]
    UnsupportedMeasure(String),

    #[error("invalid radii: inner {inner} must be positive and smaller than outer {outer}")]
    InvalidRadii { inner: f64, outer: f64 },

    #[error("requested {requested} points but the candidate pool has only {available}")]
    PoolExhausted { requested: usize, available: usize },

    #[error("solution has not converged (residual {residual:.3e} > tol {tol:.3e})")]
    Unconverged { residual: f64, tol: f64 },

    #[error("region does not intersect the grid")]
    EmptyRegion,

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("function is numerically constant on the normalization regions (spread {0:.3e})")]
    NearConstant(f64),

    #[error("subset has zero measure")]
    ZeroMeasure,

    #[error("geometry hypothesis violated: {0}")]
    GeometryHypothesis(String),

    #[error("polydisk sandwich unavailable: need a > sqrt(n), got a = {a}, n = {n}")]
    SandwichUnavailable { a: f64, n: usize },

    #[error("unsupported toric data: {0}")]
    UnsupportedToric(String),

    #[error("operation needs {expected} components, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("missing scan data: {0}")]
    NeedsScan(String),

    #[error("unsupported region for this operation: {0}")]
    UnsupportedRegion(String),

    #[error("too few points: need at least {min}, got {got}")]
    TooFewPoints { min: usize, got: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
