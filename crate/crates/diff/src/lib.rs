//! Minimal dense-tensor reverse-mode differentiation: a recorded tape of
//! operations, named parameter storage, Adam, finite-difference gradient
//! checks and a binary checkpoint format.

pub mod adam;
pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod params;
pub mod tape;
pub mod tensor;

pub use adam::Adam;
pub use checkpoint::Checkpoint;
pub use error::{CheckpointError, DiffError};
pub use gradcheck::{grad_check, GradCheckReport};
pub use params::{accumulate, Bound, ParamId, ParamStore};
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;
