use alloc::format;
use serde::{Deserialize, Serialize};

use super::{Assignment, VqVae};
use crate::nn::{Gradients, Matrix};
use crate::{Error, Result};

/// Weights of the embedding (`alpha`), commitment (`beta`) and
/// encoder-output reconstruction (`gamma`) terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Codebook maintained by moving averages; `alpha` is then unused.
    pub ema_enabled: bool,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.25,
            gamma: 1.0,
            ema_enabled: true,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!("loss weight {name} must be finite and >= 0, got {w}")));
            }
        }
        Ok(())
    }
}

/// Batch-mean loss terms, already weighted. `total` is their sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub recon_q: f64,
    pub embed: f64,
    pub commit: f64,
    pub recon_e: f64,
    pub total: f64,
}

impl LossParts {
    fn new(recon_q: f64, embed: f64, commit: f64, recon_e: f64) -> Self {
        Self {
            recon_q,
            embed,
            commit,
            recon_e,
            total: recon_q + embed + commit + recon_e,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.recon_q, self.embed, self.commit, self.recon_e, self.total]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Everything one training step needs from a batch.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub parts: LossParts,
    pub encoder_grads: Gradients,
    pub decoder_grads: Gradients,
    /// Embedding-loss gradient; `None` when the codebook is EMA-trained.
    pub codebook_grads: Option<Matrix>,
    pub assignment: Assignment,
    /// dL/dz_q from the quantized reconstruction path.
    pub decoder_input_grad: Matrix,
    /// Total upstream gradient entering the encoder at z_e.
    pub encoder_output_grad: Matrix,
}

fn mean_mse(x: &Matrix, x_hat: &Matrix) -> f64 {
    let width = x.cols() as f64;
    let mut total = 0.0;
    for (a, b) in x.iter_rows().zip(x_hat.iter_rows()) {
        let s: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
        total += s / width;
    }
    total / x.rows() as f64
}

/// Gradient of `scale · mean_mse(x, x_hat)` with respect to `x_hat`.
fn mean_mse_grad(x: &Matrix, x_hat: &Matrix, scale: f64) -> Matrix {
    let k = 2.0 * scale / (x.cols() as f64 * x.rows() as f64);
    let mut g = Matrix::zeros(x.rows(), x.cols());
    for r in 0..x.rows() {
        for ((o, a), b) in g.row_mut(r).iter_mut().zip(x.row(r)).zip(x_hat.row(r)) {
            *o = k * (b - a);
        }
    }
    g
}

fn mean_sq_distance(a: &Matrix, b: &Matrix) -> f64 {
    let mut total = 0.0;
    for (p, q) in a.iter_rows().zip(b.iter_rows()) {
        total += p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    }
    total / a.rows() as f64
}

impl VqVae {
    fn check_batch(&self, batch: &Matrix) -> Result<()> {
        if batch.rows() == 0 {
            return Err(Error::invalid("empty batch"));
        }
        if batch.cols() != self.input_width() {
            return Err(Error::shape("batch width", self.input_width(), batch.cols()));
        }
        Ok(())
    }

    /// Weighted loss terms averaged over the batch.
    pub fn loss(&self, batch: &Matrix) -> Result<LossParts> {
        self.check_batch(batch)?;
        let w = self.loss_weights;
        let assignment = self.assign_batch(batch)?;
        let recon_q = mean_mse(batch, &self.decode_batch(&assignment.z_q)?);
        let recon_e = if w.gamma > 0.0 {
            w.gamma * mean_mse(batch, &self.decode_batch(&assignment.z_e)?)
        } else {
            0.0
        };
        let sq = mean_sq_distance(&assignment.z_e, &assignment.z_q);
        let embed = if w.ema_enabled { 0.0 } else { w.alpha * sq };
        Ok(LossParts::new(recon_q, embed, w.beta * sq, recon_e))
    }

    /// Loss and gradients for one batch.
    ///
    /// The quantized reconstruction gradient arriving at the decoder input is
    /// copied unchanged onto the encoder output (straight-through); the
    /// codebook never receives gradient from the reconstruction terms. The
    /// encoder additionally receives the commitment gradient and the
    /// `gamma`-weighted gradient of the unquantized reconstruction.
    pub fn forward_backward(&self, batch: &Matrix) -> Result<StepOutput> {
        self.check_batch(batch)?;
        let w = self.loss_weights;
        let n = batch.rows() as f64;

        let (z_e, enc_cache) = self.encoder.forward_batch(batch)?;
        let assignment = self.assign_latents(z_e)?;

        let mut decoder_grads = Gradients::zeros_like(&self.decoder);
        let (x_q, cache_q) = self.decoder.forward_batch(&assignment.z_q)?;
        let recon_q = mean_mse(batch, &x_q);
        let decoder_input_grad = self
            .decoder
            .backward_accumulate(&cache_q, &mean_mse_grad(batch, &x_q, 1.0), &mut decoder_grads, true)?
            .expect("input gradient requested");

        // Zero-weighted terms are skipped rather than added as zeros so the
        // straight-through copy stays bit-exact.
        let mut encoder_output_grad = decoder_input_grad.clone();
        let mut recon_e = 0.0;
        if w.gamma > 0.0 {
            let (x_e, cache_e) = self.decoder.forward_batch(&assignment.z_e)?;
            recon_e = w.gamma * mean_mse(batch, &x_e);
            let g_e = self
                .decoder
                .backward_accumulate(&cache_e, &mean_mse_grad(batch, &x_e, w.gamma), &mut decoder_grads, true)?
                .expect("input gradient requested");
            encoder_output_grad.add_scaled(&g_e, 1.0)?;
        }

        let sq = mean_sq_distance(&assignment.z_e, &assignment.z_q);
        let commit = w.beta * sq;
        if w.beta > 0.0 {
            let k = 2.0 * w.beta / n;
            for r in 0..assignment.z_e.rows() {
                let (ze, zq) = (assignment.z_e.row(r), assignment.z_q.row(r));
                for (c, g) in encoder_output_grad.row_mut(r).iter_mut().enumerate() {
                    *g += k * (ze[c] - zq[c]);
                }
            }
        }

        let (embed, codebook_grads) = if w.ema_enabled {
            (0.0, None)
        } else {
            let mut g = Matrix::zeros(self.codebook_size(), self.latent_dim());
            let k = 2.0 * w.alpha / n;
            for (r, &j) in assignment.indices.iter().enumerate() {
                let (ze, zq) = (assignment.z_e.row(r), assignment.z_q.row(r));
                for (c, v) in g.row_mut(j).iter_mut().enumerate() {
                    *v += k * (zq[c] - ze[c]);
                }
            }
            (w.alpha * sq, Some(g))
        };

        let mut encoder_grads = Gradients::zeros_like(&self.encoder);
        self.encoder
            .backward_accumulate(&enc_cache, &encoder_output_grad, &mut encoder_grads, false)?;

        let parts = LossParts::new(recon_q, embed, commit, recon_e);
        if !parts.is_finite()
            || !encoder_grads.is_finite()
            || !decoder_grads.is_finite()
            || codebook_grads.as_ref().is_some_and(|g| !g.is_finite())
        {
            return Err(Error::Divergence(format!("non-finite loss or gradient (loss {parts:?})")));
        }
        Ok(StepOutput {
            parts,
            encoder_grads,
            decoder_grads,
            codebook_grads,
            assignment,
            decoder_input_grad,
            encoder_output_grad,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, DenseLayer, Mlp};
    use crate::vqvae::{Architecture, Codebook};
    use crate::rng;
    use alloc::vec;
    use alloc::vec::Vec;

    fn identity_layer(n: usize, act: Activation) -> DenseLayer {
        DenseLayer::new(Matrix::identity(n), vec![0.0; n], act).unwrap()
    }

    #[test]
    fn commitment_hand_case() {
        // identity encoder, z_e = (1, 0), single embedding at the origin
        let enc = Mlp::new(vec![identity_layer(2, Activation::Identity)]).unwrap();
        let dec = Mlp::new(vec![identity_layer(2, Activation::Sigmoid)]).unwrap();
        let cb = Codebook::new(Matrix::zeros(1, 2), 0.95).unwrap();
        let weights = LossWeights { beta: 0.25, gamma: 0.0, ..LossWeights::default() };
        let m = VqVae::from_parts(enc, dec, cb, weights).unwrap();
        let batch = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let parts = m.loss(&batch).unwrap();
        assert_eq!(parts.commit, 0.25);
        assert_eq!(parts.embed, 0.0);
        assert_eq!(parts.recon_e, 0.0);
        assert_eq!(parts.total, parts.recon_q + parts.commit);
        // d/dz_e of β‖z_e − e‖² = 2β(z_e − e) = (0.5, 0)
        let out = m.forward_backward(&batch).unwrap();
        let st = out.decoder_input_grad.row(0);
        let total = out.encoder_output_grad.row(0);
        assert_eq!(total[0] - st[0], 0.5);
        assert_eq!(total[1] - st[1], 0.0);
    }

    #[test]
    fn only_reconstruction_left_when_weights_zeroed() {
        let arch = Architecture::halving(6, 4, 2, 0.4);
        let weights = LossWeights { beta: 0.0, gamma: 0.0, ema_enabled: true, alpha: 1.0 };
        let m = VqVae::new(&arch, 3, 0.95, weights, &mut rng::seeded(1)).unwrap();
        let batch = Matrix::from_rows(&[vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0]]).unwrap();
        let p = m.loss(&batch).unwrap();
        assert_eq!(p.total, p.recon_q);
    }

    #[test]
    fn empty_batch_rejected() {
        let arch = Architecture::halving(6, 4, 2, 0.4);
        let m = VqVae::new(&arch, 3, 0.95, LossWeights::default(), &mut rng::seeded(1)).unwrap();
        assert!(matches!(m.loss(&Matrix::zeros(0, 6)), Err(Error::InvalidArgument(_))));
        assert!(m.forward_backward(&Matrix::zeros(0, 6)).is_err());
    }

    #[test]
    fn perfect_reconstruction_has_zero_loss() {
        // Decoder output sigmoid(0) = 0.5, inputs all 0.5, encoder output
        // sits exactly on the single embedding.
        let enc = Mlp::new(vec![DenseLayer::new(Matrix::zeros(2, 3), vec![0.0; 2], Activation::Identity).unwrap()])
            .unwrap();
        let dec = Mlp::new(vec![DenseLayer::new(Matrix::zeros(3, 2), vec![0.0; 3], Activation::Sigmoid).unwrap()])
            .unwrap();
        let cb = Codebook::new(Matrix::zeros(1, 2), 0.95).unwrap();
        let m = VqVae::from_parts(enc, dec, cb, LossWeights { ema_enabled: false, ..LossWeights::default() }).unwrap();
        let batch = Matrix::from_rows(&[vec![0.5; 3], vec![0.5; 3]]).unwrap();
        let p = m.loss(&batch).unwrap();
        assert_eq!(p, LossParts::default());
    }

    #[test]
    fn gradient_decoder_sums_both_paths() {
        let arch = Architecture::halving(6, 4, 2, 0.4);
        let m = VqVae::new(&arch, 3, 0.95, LossWeights::default(), &mut rng::seeded(8)).unwrap();
        let batch = Matrix::from_rows(&[vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0]])
            .unwrap();
        let full = m.forward_backward(&batch).unwrap();
        let mut only_q = m.clone();
        only_q.loss_weights.gamma = 0.0;
        let q = only_q.forward_backward(&batch).unwrap();
        let diff: Vec<f64> = full.decoder_grads.buffers().concat();
        let base: Vec<f64> = q.decoder_grads.buffers().concat();
        assert!(diff.iter().zip(&base).any(|(a, b)| a != b));
        assert!(full.codebook_grads.is_none());
    }
}
