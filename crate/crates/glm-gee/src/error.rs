use thiserror::Error;

use crate::integrator::IntegrationTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("transform is singular for gamma = 1")]
    SingularTransform,
    #[error("unknown method `{name}`; available: {}", available.join(", "))]
    UnknownMethod { name: String, available: Vec<String> },
    #[error("unknown problem `{name}`; available: {}", available.join(", "))]
    UnknownProblem { name: String, available: Vec<String> },
    #[error("unsupported: {0}")]
    Capability(String),
    #[error("singular: {0}")]
    Singular(String),
    #[error("tree order {requested} exceeds the supported ceiling {ceiling}")]
    TreeCeiling { requested: usize, ceiling: usize },
    #[error("non-finite value in stage {stage} of step {step} at t = {t}")]
    Divergence {
        step: usize,
        stage: usize,
        t: f64,
        partial: Box<IntegrationTrace>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("reference oracle did not converge: {0}")]
    Oracle(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
