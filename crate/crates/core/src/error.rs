use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Library-wide error type. `Parameter`/`InvalidInput` are caller mistakes,
/// `ExistenceFailure` means the model has no equilibrium for these inputs,
/// and `Convergence` means a solver gave up before reaching tolerance.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid reference profile: {0}")]
    InvalidProfile(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("equilibrium existence failure: {0}")]
    ExistenceFailure(String),

    #[error("solver did not converge: {0}")]
    Convergence(String),

    #[error("rank-deficient design matrix: {0}")]
    RankDeficient(String),

    #[error("model infeasible: {0}")]
    Infeasible(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
