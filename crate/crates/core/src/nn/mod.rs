//! Dense feed-forward networks with hand-derived backpropagation.
//!
//! Batches are row-major matrices (`batch × features`). A forward pass
//! returns a [`ForwardCache`] that the matching backward pass consumes; the
//! cache records the network revision it was produced against, so a cache
//! that outlives a parameter update is rejected instead of silently
//! producing wrong gradients.

mod adam;
mod init;
mod layer;
mod loss;
mod matrix;

pub use adam::{AdamConfig, AdamState};
pub use init::{glorot_init, glorot_limit, uniform_matrix};
pub use layer::{Activation, DenseLayer, ForwardCache, Gradients, LayerGradients, Mlp};
pub use loss::{mse_loss, mse_loss_grad};
pub use matrix::Matrix;
pub(crate) use matrix::squared_distance;

use serde::{Deserialize, Serialize};

/// Storage precision of trained parameters.
///
/// Arithmetic is always carried out in `f64`; in `F32` mode parameters and
/// activations are rounded to the nearest `f32` after every update and every
/// layer, which reproduces single-precision storage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl Precision {
    #[inline]
    pub fn round(self, v: f64) -> f64 {
        match self {
            Precision::F64 => v,
            Precision::F32 => v as f32 as f64,
        }
    }

    pub fn round_slice(self, values: &mut [f64]) {
        if self == Precision::F32 {
            for v in values {
                *v = *v as f32 as f64;
            }
        }
    }
}
