//! Versioned JSON files: schemas, encoded datasets and model checkpoints.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vqaudit_core::ingest::{AttributeSchema, EncodedDataset};
use vqaudit_core::trainer::{TrainConfig, TrainLog};
use vqaudit_core::vqvae::VqVae;

use crate::error::{AppError, Result};
use crate::fsutil::{read_json, write_json};

pub const SCHEMA_FORMAT: &str = "vqaudit-schema";
pub const ENCODED_FORMAT: &str = "vqaudit-encoded";
pub const CHECKPOINT_FORMAT: &str = "vqaudit-checkpoint";
pub const FORMAT_VERSION: u32 = 1;

fn check_tag(path: &Path, format: &str, version: u32, want: &str) -> Result<()> {
    if format != want {
        return Err(AppError::format(path, format!("expected a {want} file, found '{format}'")));
    }
    if version != FORMAT_VERSION {
        return Err(AppError::format(
            path,
            format!("unsupported {want} version {version} (supported: {FORMAT_VERSION})"),
        ));
    }
    Ok(())
}

fn check_hash(path: &Path, stored: &str, schema: &AttributeSchema) -> Result<()> {
    let actual = schema.fingerprint();
    if stored != actual {
        return Err(AppError::format(
            path,
            format!("stored schema hash {stored} does not match contents ({actual})"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaFile {
    pub format: String,
    pub version: u32,
    pub schema_hash: String,
    pub width: usize,
    pub schema: AttributeSchema,
}

impl SchemaFile {
    pub fn new(schema: &AttributeSchema) -> Self {
        Self {
            format: SCHEMA_FORMAT.into(),
            version: FORMAT_VERSION,
            schema_hash: schema.fingerprint(),
            width: schema.width(),
            schema: schema.clone(),
        }
    }

    pub fn into_schema(self, path: &Path) -> Result<AttributeSchema> {
        check_tag(path, &self.format, self.version, SCHEMA_FORMAT)?;
        self.schema.validate()?;
        check_hash(path, &self.schema_hash, &self.schema)?;
        Ok(self.schema)
    }
}

/// An encoded dataset stored as per-row slot indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodedFile {
    pub format: String,
    pub version: u32,
    pub schema_hash: String,
    pub rows: usize,
    pub width: usize,
    pub schema: AttributeSchema,
    pub row_ids: Vec<String>,
    pub slots: Vec<Vec<usize>>,
    pub raw_rows: Vec<Vec<String>>,
    pub amounts: Vec<Option<f64>>,
}

impl EncodedFile {
    pub fn new(data: &EncodedDataset) -> Self {
        Self {
            format: ENCODED_FORMAT.into(),
            version: FORMAT_VERSION,
            schema_hash: data.schema_hash(),
            rows: data.len(),
            width: data.width(),
            schema: data.schema().clone(),
            row_ids: data.row_ids().to_vec(),
            slots: (0..data.len()).map(|r| data.slots(r)).collect(),
            raw_rows: data.raw_rows().to_vec(),
            amounts: data.amounts().to_vec(),
        }
    }

    pub fn into_dataset(self, path: &Path) -> Result<EncodedDataset> {
        check_tag(path, &self.format, self.version, ENCODED_FORMAT)?;
        check_hash(path, &self.schema_hash, &self.schema)?;
        let data = EncodedDataset::from_parts(self.schema, &self.slots, self.row_ids, self.raw_rows, self.amounts)?;
        if data.len() != self.rows || data.width() != self.width {
            return Err(AppError::format(path, "row count or width disagrees with the contents"));
        }
        Ok(data)
    }
}

pub fn write_encoded(path: &Path, data: &EncodedDataset) -> Result<()> {
    write_json(path, &EncodedFile::new(data))
}

pub fn read_encoded(path: &Path) -> Result<EncodedDataset> {
    read_json::<EncodedFile>(path)?.into_dataset(path)
}

/// A trained model with the schema it expects and how it was trained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub schema_hash: String,
    pub schema: AttributeSchema,
    pub seed: u64,
    pub train_config: TrainConfig,
    pub epochs_run: usize,
    pub stopped_early: bool,
    pub model: VqVae,
}

impl Checkpoint {
    pub fn new(model: VqVae, schema: &AttributeSchema, config: &TrainConfig, log: &TrainLog) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: FORMAT_VERSION,
            schema_hash: schema.fingerprint(),
            schema: schema.clone(),
            seed: config.seed,
            train_config: config.clone(),
            epochs_run: log.epochs(),
            stopped_early: log.stopped_early,
            model,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Read and verify format tag, version, model shapes and schema hash.
    pub fn load(path: &Path) -> Result<Self> {
        let ck: Checkpoint = read_json(path)?;
        check_tag(path, &ck.format, ck.version, CHECKPOINT_FORMAT)?;
        ck.model.validate().map_err(|e| AppError::format(path, e))?;
        check_hash(path, &ck.schema_hash, &ck.schema)?;
        if ck.model.schema_hash() != Some(ck.schema_hash.as_str()) {
            return Err(AppError::format(path, "model schema hash disagrees with the checkpoint"));
        }
        if ck.model.input_width() != ck.schema.width() {
            return Err(AppError::format(path, "model input width disagrees with the schema"));
        }
        Ok(ck)
    }

    /// Fail with a schema-hash error unless `data` was encoded with this
    /// checkpoint's schema.
    pub fn check_data(&self, data: &EncodedDataset) -> Result<()> {
        Ok(self.model.check_schema(&data.schema_hash())?)
    }
}
