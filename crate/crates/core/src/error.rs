use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dispersion solver did not converge for omega = {omega} rad/s (depth {depth} m)")]
    SolverFailure { omega: f64, depth: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("simulation diverged at step {step}: non-finite vehicle state")]
    Divergence { step: usize },

    #[error("estimator diverged: {0}")]
    EstimatorDivergence(String),

    #[error("singular innovation covariance: {covariance}")]
    SingularInnovation { covariance: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 1 for usage/configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SolverFailure { .. }
            | Error::Divergence { .. }
            | Error::EstimatorDivergence(_)
            | Error::SingularInnovation { .. } => 2,
            _ => 1,
        }
    }
}
