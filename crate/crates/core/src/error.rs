use thiserror::Error;

use crate::matcore::MatError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("input contains NaN or infinite entries")]
    NonFinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("map is not completely positive (min Choi eigenvalue {0:e})")]
    NotCompletelyPositive(f64),
    #[error("operation requires a qubit channel, got d = {0}")]
    NotQubit(usize),
    #[error("channel file: {0}")]
    Schema(String),
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("consistency failure: {0}")]
    Consistency(String),
    #[error("structure discovery failed at stage {stage}: {detail}")]
    Structure { stage: &'static str, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
