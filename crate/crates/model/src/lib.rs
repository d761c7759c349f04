//! Graph transformer model for network robustness learning: a degree
//! centrality encoder, a stack of inner/outer-head attention layers, and
//! heads for the robustness curve, overall robustness R_c and topology
//! class.

pub mod config;
pub mod context;
pub mod error;
pub mod gradnorm;
pub mod layers;
pub mod loss;
pub mod model;

pub use config::{FilterKind, LayerKind, ModelConfig};
pub use context::AttentionGraph;
pub use error::ModelError;
pub use gradnorm::GradNorm;
pub use model::{argmax, NrlGt, Prediction};
