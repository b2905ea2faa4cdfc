//! Vector-quantized autoencoder: encoder, nearest-embedding codebook,
//! decoder, the four-term training loss with straight-through gradient
//! routing, exponential-moving-average codebook maintenance, and the
//! perplexity and purity evaluation quantities.

mod codebook;
mod loss;
mod metrics;
mod model;

pub use codebook::{Codebook, Nearest, LAPLACE_FLOOR};
pub use loss::{LossParts, LossWeights, StepOutput};
pub use metrics::{assignment_counts, perplexity, purity};
pub use model::{Architecture, Assignment, VqVae};
pub(crate) use model::EVAL_CHUNK;
