use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vqaudit_core::disentangle::ProtocolParams;
use vqaudit_core::ingest::DEFAULT_NUMERIC_BINS;
use vqaudit_core::trainer::TrainConfig;

use crate::error::{AppError, Result};
use crate::fsutil::read_json;

/// Base directory for relative dataset paths, e.g. where downloaded public
/// datasets are kept.
pub const DATA_DIR_ENV: &str = "VQAUDIT_DATA_DIR";

/// Where the records come from and which columns play which role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub csv_path: PathBuf,
    /// Column holding record ids; row positions are used when absent.
    #[serde(default)]
    pub id_column: Option<String>,
    #[serde(default)]
    pub amount_column: Option<String>,
    /// Ground-truth grouping used for purity and latent exports.
    #[serde(default)]
    pub label_column: Option<String>,
    /// Columns to encode. Empty means every column except the id, amount
    /// and label columns.
    #[serde(default)]
    pub attributes: Vec<String>,
    /// Attributes to treat as numeric. When absent, kinds are inferred from
    /// the values.
    #[serde(default)]
    pub numeric_attributes: Option<Vec<String>>,
    #[serde(default = "default_bins")]
    pub numeric_bins: usize,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Fixed schema to encode with instead of fitting one.
    #[serde(default)]
    pub schema_path: Option<PathBuf>,
}

fn default_bins() -> usize {
    DEFAULT_NUMERIC_BINS
}

fn default_delimiter() -> char {
    ','
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Records listed per embedding in the audit sample.
    pub top_r: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { top_r: 1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Attributes treated as ground-truth factors.
    pub factors: Vec<String>,
    pub protocol: ProtocolParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

impl RunConfig {
    /// Read, resolve relative paths and validate.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = read_json(path).map_err(|e| match e {
            AppError::Format { message, .. } => AppError::config(path, message),
            other => other,
        })?;
        let base = match std::env::var_os(DATA_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        cfg.dataset.csv_path = resolve(&base, &cfg.dataset.csv_path);
        let here = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if let Some(s) = &cfg.dataset.schema_path {
            cfg.dataset.schema_path = Some(resolve(&here, s));
        }
        cfg.validate().map_err(|m| AppError::config(path, m))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        self.train.validate().map_err(|e| e.to_string())?;
        self.metrics.protocol.validate().map_err(|e| e.to_string())?;
        if self.sampling.top_r == 0 {
            return Err("sampling.top_r must be at least 1".into());
        }
        if self.dataset.numeric_bins < 2 {
            return Err("dataset.numeric_bins must be at least 2".into());
        }
        if !self.dataset.delimiter.is_ascii() {
            return Err("dataset.delimiter must be an ASCII character".into());
        }
        Ok(())
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
