use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{Codebook, LossWeights};
use crate::ingest::EncodedDataset;
use crate::nn::{Activation, Matrix, Mlp, Precision};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Layer widths of the encoder; the decoder mirrors them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_width: usize,
    /// Hidden encoder widths, outermost first. The bottleneck is `latent_dim`.
    pub encoder_hidden: Vec<usize>,
    pub latent_dim: usize,
    pub lrelu_slope: f64,
}

impl Architecture {
    /// `first`, then the largest power of two not above `first / 2`, then
    /// halving until the next width would reach `latent_dim`.
    pub fn halving(input_width: usize, first: usize, latent_dim: usize, lrelu_slope: f64) -> Self {
        let mut hidden = Vec::new();
        if first > latent_dim {
            hidden.push(first);
            let mut w = prev_power_of_two(first / 2);
            while w > latent_dim {
                hidden.push(w);
                w /= 2;
            }
        }
        Self {
            input_width,
            encoder_hidden: hidden,
            latent_dim,
            lrelu_slope,
        }
    }

    /// 5,096 → 2,048 → … → 4 → 2 (payments dataset A).
    pub fn dataset_a(input_width: usize, lrelu_slope: f64) -> Self {
        Self::halving(input_width, 5096, 2, lrelu_slope)
    }

    /// 2,048 → 1,024 → … → 4 → 2 (payments dataset B).
    pub fn dataset_b(input_width: usize, lrelu_slope: f64) -> Self {
        Self::halving(input_width, 2048, 2, lrelu_slope)
    }

    /// Halving stack starting at the largest power of two not above the
    /// input width.
    pub fn auto(input_width: usize, latent_dim: usize, lrelu_slope: f64) -> Self {
        Self::halving(input_width, prev_power_of_two(input_width), latent_dim, lrelu_slope)
    }

    pub fn encoder_widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.encoder_hidden.len() + 2);
        w.push(self.input_width);
        w.extend_from_slice(&self.encoder_hidden);
        w.push(self.latent_dim);
        w
    }

    pub fn decoder_widths(&self) -> Vec<usize> {
        let mut w = self.encoder_widths();
        w.reverse();
        w
    }

    fn validate(&self) -> Result<()> {
        if self.input_width == 0 || self.latent_dim == 0 || self.encoder_hidden.contains(&0) {
            return Err(Error::invalid(format!("zero width in architecture {:?}", self.encoder_widths())));
        }
        Ok(())
    }
}

fn prev_power_of_two(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - n.leading_zeros())
    }
}

/// Per-row encoder outputs, embedding indices and quantized vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub indices: Vec<usize>,
    pub z_e: Matrix,
    pub z_q: Matrix,
    /// `‖z_e − e_k‖₂` per row.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqVae {
    pub(super) encoder: Mlp,
    pub(super) decoder: Mlp,
    pub(super) codebook: Codebook,
    pub(super) loss_weights: LossWeights,
    #[serde(default)]
    schema_hash: Option<String>,
}

impl VqVae {
    /// Glorot-initialized encoder and decoder, `U(-1, 1)` codebook. The
    /// generator is consumed in that order.
    pub fn new(
        arch: &Architecture,
        codebook_size: usize,
        ema_decay: f64,
        loss_weights: LossWeights,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        arch.validate()?;
        let hidden = Activation::LeakyRelu {
            slope: arch.lrelu_slope,
        };
        let encoder = Mlp::glorot(&arch.encoder_widths(), hidden, Activation::Identity, rng)?;
        let decoder = Mlp::glorot(&arch.decoder_widths(), hidden, Activation::Sigmoid, rng)?;
        let codebook = Codebook::uniform(codebook_size, arch.latent_dim, ema_decay, rng)?;
        Self::from_parts(encoder, decoder, codebook, loss_weights)
    }

    pub fn from_parts(encoder: Mlp, decoder: Mlp, codebook: Codebook, loss_weights: LossWeights) -> Result<Self> {
        let model = Self {
            encoder,
            decoder,
            codebook,
            loss_weights,
            schema_hash: None,
        };
        model.validate()?;
        Ok(model)
    }

    /// Check the width invariants between encoder, codebook and decoder.
    pub fn validate(&self) -> Result<()> {
        self.codebook.validate()?;
        let d = self.codebook.dim();
        if self.encoder.output_width() != d {
            return Err(Error::shape("encoder output", d, self.encoder.output_width()));
        }
        if self.decoder.input_width() != d {
            return Err(Error::shape("decoder input", d, self.decoder.input_width()));
        }
        if self.decoder.output_width() != self.encoder.input_width() {
            return Err(Error::shape(
                "decoder output",
                self.encoder.input_width(),
                self.decoder.output_width(),
            ));
        }
        self.loss_weights.validate()
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.encoder = self.encoder.with_precision(precision);
        self.decoder = self.decoder.with_precision(precision);
        self
    }

    pub fn with_schema_hash(mut self, hash: impl Into<String>) -> Self {
        self.schema_hash = Some(hash.into());
        self
    }

    pub fn schema_hash(&self) -> Option<&str> {
        self.schema_hash.as_deref()
    }

    /// Fail unless the model was trained against a schema with this hash.
    /// Models without a recorded hash accept any schema.
    pub fn check_schema(&self, hash: &str) -> Result<()> {
        match &self.schema_hash {
            Some(h) if h != hash => Err(Error::SchemaMismatch {
                expected: h.clone(),
                found: hash.into(),
            }),
            _ => Ok(()),
        }
    }

    pub fn encoder(&self) -> &Mlp {
        &self.encoder
    }

    pub fn decoder(&self) -> &Mlp {
        &self.decoder
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn encoder_mut(&mut self) -> &mut Mlp {
        &mut self.encoder
    }

    pub fn decoder_mut(&mut self) -> &mut Mlp {
        &mut self.decoder
    }

    pub fn codebook_mut(&mut self) -> &mut Codebook {
        &mut self.codebook
    }

    pub fn loss_weights(&self) -> &LossWeights {
        &self.loss_weights
    }

    pub fn input_width(&self) -> usize {
        self.encoder.input_width()
    }

    pub fn latent_dim(&self) -> usize {
        self.codebook.dim()
    }

    pub fn codebook_size(&self) -> usize {
        self.codebook.size()
    }

    pub fn architecture(&self) -> Architecture {
        let w = self.encoder.widths();
        let slope = match self.encoder.layers()[0].activation() {
            Activation::LeakyRelu { slope } => slope,
            _ => 0.0,
        };
        Architecture {
            input_width: w[0],
            encoder_hidden: w[1..w.len() - 1].to_vec(),
            latent_dim: w[w.len() - 1],
            lrelu_slope: slope,
        }
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.encoder.predict(x)
    }

    pub fn encode_batch(&self, x: &Matrix) -> Result<Matrix> {
        self.encoder.predict_batch(x)
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.latent_dim() {
            return Err(Error::shape("decoder input", self.latent_dim(), z.len()));
        }
        self.decoder.predict(z)
    }

    pub fn decode_batch(&self, z: &Matrix) -> Result<Matrix> {
        self.decoder.predict_batch(z)
    }

    /// Nearest-embedding assignment of already-encoded latents.
    pub fn assign_latents(&self, z_e: Matrix) -> Result<Assignment> {
        let n = z_e.rows();
        let mut indices = Vec::with_capacity(n);
        let mut distances = Vec::with_capacity(n);
        let mut z_q = Matrix::zeros(n, self.latent_dim());
        for r in 0..n {
            let nearest = self.codebook.nearest(z_e.row(r))?;
            indices.push(nearest.index);
            distances.push(nearest.distance());
            z_q.row_mut(r).copy_from_slice(self.codebook.embedding(nearest.index));
        }
        Ok(Assignment {
            indices,
            z_e,
            z_q,
            distances,
        })
    }

    pub fn assign_batch(&self, x: &Matrix) -> Result<Assignment> {
        self.assign_latents(self.encode_batch(x)?)
    }

    /// Encode and assign every row of a dataset, in row order.
    pub fn assign_dataset(&self, data: &EncodedDataset) -> Result<Assignment> {
        self.check_schema(&data.schema_hash())?;
        if data.width() != self.input_width() {
            return Err(Error::shape("dataset width", self.input_width(), data.width()));
        }
        let n = data.len();
        let mut z_e = Matrix::zeros(n, self.latent_dim());
        let rows: Vec<usize> = (0..n).collect();
        let mut start = 0;
        for chunk in rows.chunks(EVAL_CHUNK) {
            let z = self.encode_batch(&data.dense_rows(chunk))?;
            for r in 0..chunk.len() {
                z_e.row_mut(start + r).copy_from_slice(z.row(r));
            }
            start += chunk.len();
        }
        self.assign_latents(z_e)
    }
}

/// Rows per dense block when sweeping a whole dataset.
pub(crate) const EVAL_CHUNK: usize = 1024;
