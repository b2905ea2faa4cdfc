use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::nn::{AdamConfig, Precision};
use crate::vqvae::{Architecture, LossWeights};
use crate::{Error, Result};

/// Which encoder/decoder stack to build for a dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchitectureChoice {
    /// Halving widths from the largest power of two not above the input width.
    #[default]
    Auto,
    /// Payments dataset A stack (5,096 → 2,048 → … → 4 → D).
    DatasetA,
    /// Payments dataset B stack (2,048 → 1,024 → … → 4 → D).
    DatasetB,
    /// Halving widths starting at `first`.
    Halving { first: usize },
    /// Hidden encoder widths spelled out.
    Explicit { hidden: Vec<usize> },
}

impl ArchitectureChoice {
    pub fn resolve(&self, input_width: usize, latent_dim: usize, lrelu_slope: f64) -> Architecture {
        match self {
            ArchitectureChoice::Auto => Architecture::auto(input_width, latent_dim, lrelu_slope),
            ArchitectureChoice::DatasetA => Architecture::halving(input_width, 5096, latent_dim, lrelu_slope),
            ArchitectureChoice::DatasetB => Architecture::halving(input_width, 2048, latent_dim, lrelu_slope),
            ArchitectureChoice::Halving { first } => {
                Architecture::halving(input_width, *first, latent_dim, lrelu_slope)
            }
            ArchitectureChoice::Explicit { hidden } => Architecture {
                input_width,
                encoder_hidden: hidden.clone(),
                latent_dim,
                lrelu_slope,
            },
        }
    }
}

/// Stop once total loss fails to improve by a relative `min_delta` for
/// `patience` consecutive epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EarlyStopping {
    pub patience: usize,
    pub min_delta: f64,
}

impl Default for EarlyStopping {
    fn default() -> Self {
        Self {
            patience: 50,
            min_delta: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub codebook_size: usize,
    pub latent_dim: usize,
    pub architecture: ArchitectureChoice,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub lrelu_slope: f64,
    pub ema_decay: f64,
    pub adam: AdamConfig,
    pub loss_weights: LossWeights,
    pub early_stopping: EarlyStopping,
    pub seed: u64,
    pub precision: Precision,
    /// Move embeddings that received no rows during an epoch onto a random
    /// encoder output.
    pub restart_dead_codes: bool,
    /// Full-dataset perplexity and reconstruction every this many epochs.
    pub metrics_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            codebook_size: 16,
            latent_dim: 2,
            architecture: ArchitectureChoice::Auto,
            max_epochs: 4000,
            batch_size: 128,
            lrelu_slope: 0.4,
            ema_decay: 0.95,
            adam: AdamConfig::default(),
            loss_weights: LossWeights::default(),
            early_stopping: EarlyStopping::default(),
            seed: 0,
            precision: Precision::F64,
            restart_dead_codes: false,
            metrics_every: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::invalid(format!("train config: {what}")));
        if !(2..=1 << 16).contains(&self.codebook_size) {
            return fail("codebook_size must lie in [2, 65536]");
        }
        if self.latent_dim == 0 {
            return fail("latent_dim must be >= 1");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be >= 1");
        }
        if self.max_epochs == 0 {
            return fail("max_epochs must be >= 1");
        }
        if !(self.lrelu_slope > 0.0 && self.lrelu_slope < 1.0) {
            return fail("lrelu_slope must lie in (0, 1)");
        }
        if !(self.ema_decay > 0.0 && self.ema_decay < 1.0) {
            return fail("ema_decay must lie in (0, 1)");
        }
        if !(self.early_stopping.min_delta >= 0.0) {
            return fail("early_stopping.min_delta must be >= 0");
        }
        if self.metrics_every == 0 {
            return fail("metrics_every must be >= 1");
        }
        self.adam.validate()?;
        self.loss_weights.validate()
    }

    pub fn architecture_for(&self, input_width: usize) -> Architecture {
        self.architecture.resolve(input_width, self.latent_dim, self.lrelu_slope)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = TrainConfig::default();
        c.validate().unwrap();
        assert_eq!(c.batch_size, 128);
        assert_eq!(c.max_epochs, 4000);
        assert_eq!(c.ema_decay, 0.95);
        assert_eq!(c.lrelu_slope, 0.4);
        assert_eq!((c.adam.beta1, c.adam.beta2), (0.9, 0.999));
    }

    #[test]
    fn out_of_range_values_rejected() {
        for c in [
            TrainConfig { codebook_size: 1, ..Default::default() },
            TrainConfig { batch_size: 0, ..Default::default() },
            TrainConfig { max_epochs: 0, ..Default::default() },
            TrainConfig { ema_decay: 1.0, ..Default::default() },
        ] {
            assert!(c.validate().is_err());
        }
    }
}
