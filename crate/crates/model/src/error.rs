use nrlgt_diff::{CheckpointError, DiffError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("curve head is configured for {expected} nodes, graph has {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("bad model manifest: {0}")]
    Manifest(String),
    #[error("label {label} out of range for {classes} classes")]
    Label { label: usize, classes: usize },
}
