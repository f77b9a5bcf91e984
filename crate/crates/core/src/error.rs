use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("capacity exceeded: dimension {requested} is above the limit {limit}")]
    Capacity { requested: usize, limit: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("matrix is not Hermitian (max asymmetry {deviation:e})")]
    Hermiticity { deviation: f64 },
    #[error("invalid basis: {0}")]
    Basis(String),
    #[error("target state lies outside the span (residual {residual:e})")]
    Span { residual: f64 },
    #[error("states are linearly dependent: rank {rank} < {expected}")]
    Rank { rank: usize, expected: usize },
    #[error("cloning efficiencies are infeasible (min eigenvalue {min_eigenvalue:e})")]
    Feasibility { min_eigenvalue: f64 },
    #[error("state matrix is ill-conditioned (condition number {condition:e})")]
    Conditioning { condition: f64 },
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),
    #[error("label {label} out of range 1..={max}")]
    Label { label: usize, max: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
