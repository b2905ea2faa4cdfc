use std::collections::BTreeMap;
use std::path::Path;

use vqaudit_core::ingest::{
    infer_kind, parse_number, AttributeKind, AttributeSchema, Column, EncodedDataset, JournalEntry, RawTable,
};

use crate::config::DatasetConfig;
use crate::error::{AppError, Result};
use crate::fsutil::read_json;

/// Read a headered CSV into a raw table. Every column is kept as a string
/// value; `columns` lists the configured attributes with their kinds.
pub fn load_csv(cfg: &DatasetConfig) -> Result<RawTable> {
    let path = &cfg.csv_path;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(cfg.delimiter as u8)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    for (what, col) in [
        ("id_column", &cfg.id_column),
        ("amount_column", &cfg.amount_column),
        ("label_column", &cfg.label_column),
    ] {
        if let Some(c) = col {
            if !headers.contains(c) {
                return Err(AppError::format(path, format!("{what} '{c}' is not a CSV column")));
            }
        }
    }
    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let values: BTreeMap<String, String> = headers
            .iter()
            .zip(record.iter())
            .map(|(h, v)| (h.clone(), v.trim().to_string()))
            .collect();
        let row_id = match &cfg.id_column {
            Some(c) => values[c].clone(),
            None => i.to_string(),
        };
        let amount = cfg.amount_column.as_ref().and_then(|c| parse_number(&values[c]));
        entries.push(JournalEntry { row_id, values, amount });
    }
    if entries.is_empty() {
        return Err(AppError::format(path, "no data rows"));
    }

    let names: Vec<String> = if cfg.attributes.is_empty() {
        let skip = [&cfg.id_column, &cfg.amount_column, &cfg.label_column];
        headers
            .iter()
            .filter(|h| !skip.iter().any(|s| s.as_deref() == Some(h.as_str())))
            .cloned()
            .collect()
    } else {
        for a in &cfg.attributes {
            if !headers.contains(a) {
                return Err(AppError::format(path, format!("attribute '{a}' is not a CSV column")));
            }
        }
        cfg.attributes.clone()
    };
    if names.is_empty() {
        return Err(AppError::format(path, "no attribute columns to encode"));
    }
    let columns = names
        .into_iter()
        .map(|name| {
            let kind = match &cfg.numeric_attributes {
                Some(numeric) if numeric.contains(&name) => AttributeKind::Numeric,
                Some(_) => AttributeKind::Categorical,
                None => infer_kind(entries.iter().map(|e| e.get(&name).unwrap_or(""))),
            };
            Column { name, kind }
        })
        .collect();
    Ok(RawTable { columns, entries })
}

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    let row = e.position().map(|p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        csv::ErrorKind::Io(io) => return AppError::io(path, std::io::Error::new(io.kind(), io.to_string())),
        _ => e.to_string(),
    };
    match row {
        Some(line) => AppError::format(path, format!("line {line}: {message}")),
        None => AppError::format(path, message),
    }
}

/// Raw records and their encoding.
pub struct Prepared {
    pub table: RawTable,
    pub dataset: EncodedDataset,
    pub warnings: Vec<String>,
}

impl Prepared {
    /// Per-row values of a raw column.
    pub fn column(&self, name: &str) -> Vec<String> {
        self.table.column_values(name).map(str::to_string).collect()
    }

    pub fn labels(&self, cfg: &DatasetConfig) -> Option<Vec<String>> {
        cfg.label_column.as_deref().map(|c| self.column(c))
    }
}

/// Load the CSV and encode it with the configured schema, or with one
/// fitted to the data.
pub fn prepare(cfg: &DatasetConfig) -> Result<Prepared> {
    let table = load_csv(cfg)?;
    let (schema, warnings) = match &cfg.schema_path {
        Some(p) => (read_schema(p)?, Vec::new()),
        None => AttributeSchema::fit(&table.columns, &table.entries, cfg.numeric_bins)?,
    };
    let dataset = EncodedDataset::encode(&table.entries, &schema)?;
    Ok(Prepared {
        table,
        dataset,
        warnings,
    })
}

pub fn read_schema(path: &Path) -> Result<AttributeSchema> {
    let file: crate::formats::SchemaFile = read_json(path)?;
    file.into_schema(path)
}
