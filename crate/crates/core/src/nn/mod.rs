//! Minimal reverse-mode differentiation over row-major matrices, plus the
//! layers the edge-scoring Q-network needs.

mod checkpoint;
mod gat;
mod gradcheck;
mod optim;
mod tape;
mod tensor;

pub use checkpoint::Checkpoint;
pub use gat::{GatLayer, Projection, ATTENTION_SLOPE};
pub use gradcheck::{grad_check, GradCheckOptions, GradCheckReport, Probe};
pub use optim::{Adam, Optimizer, Sgd};
pub use tape::{Gradients, Tape, Var};
pub use tensor::{ParamId, ParamSet, Tensor};

/// Negative slope of hidden-layer LeakyReLU activations.
pub const HIDDEN_SLOPE: f64 = 0.01;
