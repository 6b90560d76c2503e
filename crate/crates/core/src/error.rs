use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid dgos scheme: {0}")]
    InvalidScheme(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("no convergence after {iterations} iterations: {reason}")]
    NoConvergence { iterations: usize, reason: String },

    #[error("hessian is not negative definite at the optimum")]
    NonConcaveAtOptimum,

    #[error("approximation out of range: {0}")]
    ApproximationOutOfRange(String),

    #[error("invalid estimate: {0}")]
    InvalidEstimate(String),

    #[error("plan infeasible: {0}")]
    PlanInfeasible(String),

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            domain,
        }
    }
}
