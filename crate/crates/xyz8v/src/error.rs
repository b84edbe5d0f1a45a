use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("theta_X is undefined for the untwisted case (0,0)")]
    UnsupportedTwist,
    #[error("dynamical parameter t = {0} sits on a zero of theta")]
    SingularDynamicalParameter(String),
    #[error("non-generic parameters: {0}")]
    NonGeneric(String),
    #[error("singular operator: {0}")]
    Singular(String),
    #[error("inconsistent eigenvalue data: {0}")]
    Inconsistent(String),
    #[error("{0}")]
    Ambiguous(String),
    #[error("missing dependency: {0}")]
    Dependency(String),
    #[error("no admissible beta vector: {0}")]
    NoAdmissibleBeta(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
