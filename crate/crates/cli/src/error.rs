use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] pqcm_core::Error),
    /// A well-formed request whose answer is "no such machine".
    #[error("infeasible: minimum eigenvalue {min_eigenvalue:e}")]
    Infeasible { min_eigenvalue: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible { .. } | CliError::Core(pqcm_core::Error::Feasibility { .. }) => 2,
            _ => 1,
        }
    }
}
