use thiserror::Error;

use crate::ndio::NdioError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("label {label} out of range for {nodes} nodes")]
    LabelOutOfRange { label: usize, nodes: usize },
    #[error("negative superpixel label {label} at pixel {pixel}")]
    NegativeLabel { label: i32, pixel: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("stage {stage} is missing its input {input}")]
    MissingInput { stage: &'static str, input: String },
    #[error("stage {stage} requires {requires} to run first")]
    StageDependencyViolation { stage: &'static str, requires: &'static str },
    #[error(transparent)]
    Io(#[from] NdioError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
