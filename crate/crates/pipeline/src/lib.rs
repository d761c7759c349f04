//! Dataset generation, two-step training, evaluation, transfer and
//! spectral baselines for the NRL-GT robustness learner.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod report;
pub mod train;

pub use config::PipelineConfig;
pub use dataset::{Dataset, Manifest, Sample};
pub use error::PipelineError;
