use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::report::{aggregate_reports, evaluate, AggregateReport, QuantizationReport};
use super::TrainConfig;
use crate::ingest::EncodedDataset;
use crate::nn::{AdamState, Precision};
use crate::rng;
use crate::vqvae::{perplexity, VqVae};
use crate::{Error, Result};

/// Whole-dataset metrics computed every `metrics_every` epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullSetMetrics {
    pub recon_q: f64,
    pub recon_e: f64,
    pub perplexity: f64,
}

/// Batch-size-weighted means over one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub recon_q: f64,
    pub embed: f64,
    pub commit: f64,
    pub recon_e: f64,
    pub total: f64,
    /// Perplexity of the assignments made during the epoch.
    pub perplexity: f64,
    pub usage: Vec<usize>,
    pub seconds: f64,
    pub full_set: Option<FullSetMetrics>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub records: Vec<EpochRecord>,
    pub stopped_early: bool,
    pub restarted_codes: usize,
}

impl TrainLog {
    pub fn epochs(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: VqVae,
    pub log: TrainLog,
}

/// A run that stopped on an error. `model` holds the parameters at the time
/// of failure (absent if the model could not be built) for diagnostics.
#[derive(Debug, Clone)]
pub struct TrainFailure {
    pub error: Error,
    pub model: Option<Box<VqVae>>,
    pub log: TrainLog,
}

impl From<Error> for TrainFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            model: None,
            log: TrainLog::default(),
        }
    }
}

impl core::fmt::Display for TrainFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} after {} epochs", self.error, self.log.epochs())
    }
}

/// Training driver. Time is read through an optional clock so the loop
/// stays usable without `std`.
pub struct Trainer<'a> {
    config: TrainConfig,
    clock: Option<&'a dyn Fn() -> f64>,
    observer: Option<&'a mut dyn FnMut(&EpochRecord)>,
}

pub fn train(data: &EncodedDataset, config: &TrainConfig) -> Result<TrainedModel, TrainFailure> {
    Trainer::new(config.clone()).run(data)
}

impl<'a> Trainer<'a> {
    pub fn new(config: TrainConfig) -> Self {
        Self {
            config,
            clock: None,
            observer: None,
        }
    }

    /// Seconds since an arbitrary origin.
    pub fn with_clock(mut self, clock: &'a dyn Fn() -> f64) -> Self {
        self.clock = Some(clock);
        self
    }

    /// Called after every completed epoch.
    pub fn with_observer(mut self, observer: &'a mut dyn FnMut(&EpochRecord)) -> Self {
        self.observer = Some(observer);
        self
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    fn now(&self) -> f64 {
        self.clock.map_or(0.0, |c| c())
    }

    /// Build the initial model for `data` from the configured seed.
    pub fn init_model(&self, data: &EncodedDataset) -> Result<VqVae> {
        let c = &self.config;
        let arch = c.architecture_for(data.width());
        let mut r = rng::seeded(c.seed);
        let model = VqVae::new(&arch, c.codebook_size, c.ema_decay, c.loss_weights, &mut r)?
            .with_precision(c.precision)
            .with_schema_hash(data.schema_hash());
        Ok(model)
    }

    pub fn run(mut self, data: &EncodedDataset) -> Result<TrainedModel, TrainFailure> {
        self.config.validate()?;
        if data.is_empty() {
            return Err(Error::invalid("cannot train on an empty dataset").into());
        }
        let model = self.init_model(data)?;
        let mut log = TrainLog::default();
        match self.fit(data, model, &mut log) {
            Ok(model) => Ok(TrainedModel { model, log }),
            Err(failed) => Err(TrainFailure {
                error: failed.0,
                model: Some(Box::new(failed.1)),
                log,
            }),
        }
    }

    fn fit(&mut self, data: &EncodedDataset, mut model: VqVae, log: &mut TrainLog) -> Result<VqVae, Box<(Error, VqVae)>> {
        macro_rules! tri {
            ($e:expr) => {
                match $e {
                    Ok(v) => v,
                    Err(err) => return Err(Box::new((err, model))),
                }
            };
        }
        let c = self.config.clone();
        let k = c.codebook_size;
        let lens = |bufs: Vec<&[f64]>| bufs.iter().map(|b| b.len()).collect::<Vec<_>>();
        let enc_lens = lens(crate::nn::Gradients::zeros_like(model.encoder()).buffers());
        let dec_lens = lens(crate::nn::Gradients::zeros_like(model.decoder()).buffers());
        let mut enc_adam = tri!(AdamState::new(c.adam, &enc_lens));
        let mut dec_adam = tri!(AdamState::new(c.adam, &dec_lens));
        let mut cb_adam = tri!(AdamState::new(c.adam, &[k * c.latent_dim]));

        let n = data.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        let mut stale = 0usize;
        let start = self.now();

        for epoch in 0..c.max_epochs {
            let mut erng = rng::stream(c.seed, epoch as u64);
            order.iter_mut().enumerate().for_each(|(i, o)| *o = i);
            order.shuffle(&mut erng);

            let mut sums = [0.0f64; 5];
            let mut usage = vec![0usize; k];
            let mut last_latents = None;
            for chunk in order.chunks(c.batch_size) {
                let x = data.dense_rows(chunk);
                let out = tri!(model.forward_backward(&x));
                tri!(enc_adam.step(&mut model.encoder_mut().param_buffers_mut(), &out.encoder_grads.buffers()));
                tri!(dec_adam.step(&mut model.decoder_mut().param_buffers_mut(), &out.decoder_grads.buffers()));
                model.encoder_mut().apply_precision();
                model.decoder_mut().apply_precision();
                if let Some(g) = &out.codebook_grads {
                    tri!(cb_adam.step(&mut [model.codebook_mut().embeddings_mut().as_mut_slice()], &[g.as_slice()]));
                } else {
                    tri!(model.codebook_mut().ema_update(&out.assignment.z_e, &out.assignment.indices));
                }
                if c.precision == Precision::F32 {
                    Precision::F32.round_slice(model.codebook_mut().embeddings_mut().as_mut_slice());
                }
                let w = chunk.len() as f64;
                let p = out.parts;
                for (s, v) in sums.iter_mut().zip([p.recon_q, p.embed, p.commit, p.recon_e, p.total]) {
                    *s += w * v;
                }
                for &j in &out.assignment.indices {
                    usage[j] += 1;
                }
                last_latents = Some(out.assignment.z_e);
            }
            let [recon_q, embed, commit, recon_e, total] = sums.map(|s| s / n as f64);
            if !total.is_finite() {
                return Err(Box::new((Error::Divergence(alloc::format!("non-finite loss at epoch {epoch}")), model)));
            }

            if c.restart_dead_codes {
                if let Some(z) = &last_latents {
                    for j in (0..k).filter(|&j| usage[j] == 0) {
                        let r = erng.random_range(0..z.rows());
                        tri!(model.codebook_mut().restart(j, z.row(r)));
                        log.restarted_codes += 1;
                    }
                }
            }

            let last_epoch = epoch + 1 == c.max_epochs;
            let mut record = EpochRecord {
                epoch,
                recon_q,
                embed,
                commit,
                recon_e,
                total,
                perplexity: tri!(perplexity(&usage)),
                usage,
                seconds: self.now() - start,
                full_set: None,
            };

            let improved = total < best * (1.0 - c.early_stopping.min_delta);
            if improved {
                best = total;
                stale = 0;
            } else {
                stale += 1;
            }
            let stop = stale >= c.early_stopping.patience;

            if (epoch + 1) % c.metrics_every == 0 || last_epoch || stop {
                let r = tri!(evaluate::<u8>(&model, data, None));
                record.full_set = Some(FullSetMetrics {
                    recon_q: r.recon_q,
                    recon_e: r.recon_e,
                    perplexity: r.perplexity,
                });
            }
            if let Some(obs) = self.observer.as_mut() {
                obs(&record);
            }
            log.records.push(record);
            if stop {
                log.stopped_early = true;
                break;
            }
        }
        Ok(model)
    }
}

/// Outcome of one seed in a multi-seed run.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub outcome: core::result::Result<(TrainedModel, QuantizationReport), String>,
}

#[derive(Debug, Clone)]
pub struct MultiSeedRun {
    pub runs: Vec<SeedRun>,
    /// Aggregate over the seeds that completed.
    pub aggregate: Option<AggregateReport>,
}

/// Train one independent model per seed and aggregate their reports.
/// A failing seed is recorded and does not stop the others.
pub fn multi_seed_run<L: Ord>(
    data: &EncodedDataset,
    config: &TrainConfig,
    seeds: &[u64],
    labels: Option<&[L]>,
) -> Result<MultiSeedRun> {
    if seeds.is_empty() {
        return Err(Error::invalid("multi-seed run needs at least one seed"));
    }
    let runs: Vec<SeedRun> = seeds
        .iter()
        .map(|&seed| {
            let cfg = TrainConfig { seed, ..config.clone() };
            let outcome = train(data, &cfg)
                .map_err(|f| f.to_string())
                .and_then(|t| {
                    let report = evaluate(&t.model, data, labels).map_err(|e| e.to_string())?;
                    Ok((t, report))
                });
            SeedRun { seed, outcome }
        })
        .collect();
    let reports: Vec<QuantizationReport> = runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|(_, rep)| rep.clone()))
        .collect();
    Ok(MultiSeedRun {
        aggregate: aggregate_reports(&reports),
        runs,
    })
}
