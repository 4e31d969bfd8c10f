//! Learned activation-function selection for a single dense layer.
//!
//! A routed layer computes `h = W x + b` and outputs a mixture
//! `y = Σ_j p_j σ_j(h)` over a fixed catalog of five activations
//! ([`ActivationKind::ALL`]). The mixing weights `p` are Gumbel-Softmax
//! samples drawn from trainable logits, so the choice of activation is
//! optimized by gradient descent together with `W` and `b`. At evaluation the
//! layer commits to the argmax of its logits.
//!
//! Left alone, the router tends to prefer unbounded activations (ReLU and
//! LeakyReLU) because their larger outputs produce larger logit gradients.
//! The [`regularizer`] module counters this with a KL penalty towards
//! pseudo-probabilities built from per-candidate gradient norms.
//!
//! Module map:
//!
//! - [`numkit`]: vectors, matrices, the seeded [`Rng`], finite differences.
//! - [`activations`]: the candidate catalog with values and derivatives.
//! - [`routing`]: Gumbel noise, tempered softmax, forward and backward passes.
//! - [`regularizer`]: gradient norms, pseudo-probabilities, KL and its gradient.
//! - [`model`]: MSE, temperature annealing, the training loop and evaluation.
//! - [`synthdata`]: the `y = a(k·x₀)` regression task with Gaussian distractors.
//! - [`harness`]: grid runner, CLI parsing, CSV/JSON output and SVG plots.
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

pub mod activations;
pub mod harness;
pub mod model;
pub mod numkit;
pub mod regularizer;
pub mod routing;
pub mod synthdata;

mod error;

pub use activations::{ActivationKind, Catalog};
pub use error::{Error, Result};
pub use model::{evaluate, train, Network, NetworkMode, TrainConfig, TrainTrace};
pub use numkit::{Matrix, Rng, Vector};
pub use regularizer::{LossBreakdown, RegularizerConfig};
pub use routing::{ProbVector, RoutedLayer};
pub use synthdata::{Dataset, DatasetSpec};
