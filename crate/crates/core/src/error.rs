use magbeam_conic::ConicError;
use thiserror::Error;

use crate::scenario::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{field}: unknown unit `{unit}`")]
    UnknownUnit { field: String, unit: String },
    #[error("{field}: {detail}")]
    Shape { field: String, detail: String },
    #[error("invalid scenario: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("efficiency undefined: total TX power is zero")]
    ZeroTxPower,
    #[error("singular matrix: {0}")]
    Singular(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
