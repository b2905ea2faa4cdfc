//! Mini-batch training: seeded shuffling, Adam updates of the encoder and
//! decoder, per-batch EMA codebook maintenance, early stopping, and
//! multi-seed aggregation.

mod config;
mod report;
mod train;

pub use config::{ArchitectureChoice, EarlyStopping, TrainConfig};
pub use report::{aggregate_reports, evaluate, AggregateReport, QuantizationReport};
pub use train::{multi_seed_run, train, EpochRecord, FullSetMetrics, MultiSeedRun, SeedRun, TrainFailure, TrainLog, TrainedModel, Trainer};
