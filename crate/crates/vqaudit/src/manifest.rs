use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use vqaudit_core::ingest::EncodedDataset;

use crate::error::{AppError, Result};
use crate::fsutil::write_json;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub rows: usize,
    pub width: usize,
    pub schema_hash: String,
}

impl DatasetFingerprint {
    pub fn of(data: &EncodedDataset) -> Self {
        Self {
            rows: data.len(),
            width: data.width(),
            schema_hash: data.schema_hash(),
        }
    }
}

/// What a run did, with what, and what it wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    /// Effective configuration, after defaults and command-line overrides.
    pub config: serde_json::Value,
    pub dataset: Option<DatasetFingerprint>,
    pub seeds: Vec<u64>,
    pub deterministic: bool,
    /// Unix time in seconds.
    pub started_at: f64,
    pub finished_at: f64,
    /// Output files, relative to the output directory.
    pub outputs: Vec<PathBuf>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, deterministic: bool) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args,
            config: serde_json::Value::Null,
            dataset: None,
            seeds: Vec::new(),
            deterministic,
            started_at: unix_now(),
            finished_at: 0.0,
            outputs: Vec::new(),
        }
    }

    /// Stamp the end time and write the manifest into `out_dir`, after
    /// checking that every listed output exists.
    pub fn finish(mut self, out_dir: &Path) -> Result<PathBuf> {
        for o in &self.outputs {
            let p = out_dir.join(o);
            if !p.is_file() {
                return Err(AppError::io(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "listed output is missing"),
                ));
            }
        }
        self.finished_at = unix_now();
        let path = out_dir.join(MANIFEST_FILE);
        write_json(&path, &self)?;
        Ok(path)
    }
}
