use thiserror::Error;

/// Errors raised by the solvers, the experiment runner and the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HjError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("window outside domain")]
    WindowOutsideDomain,

    #[error("legendre requires convexity")]
    LegendreRequiresConvexity,

    #[error("origin not interior to sublevel set")]
    OriginNotInterior,

    #[error("not in Kruzhkov range: value {0}")]
    NotInKruzhkovRange(f64),

    #[error("constraint set empty at this eta/box")]
    EmptyConstraintSet,

    #[error("sequence violates (propsuit) surrogate: {0}")]
    SequenceViolatesRatio(String),

    #[error("variational problem unbounded window")]
    UnboundedWindow,

    #[error("CFL violation: {0}")]
    CflViolation(String),

    #[error("monotonicity range exceeded, increase θ (|gradient| {gradient} > {bound})")]
    MonotonicityRangeExceeded { gradient: f64, bound: f64 },

    #[error("monotonicity violated, refine grids")]
    LambdaMonotonicityViolated,

    #[error("unknown experiment: {0}")]
    UnknownExperiment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for HjError {
    fn from(e: std::io::Error) -> Self {
        HjError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HjError {
    fn from(e: serde_json::Error) -> Self {
        HjError::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HjError>;
