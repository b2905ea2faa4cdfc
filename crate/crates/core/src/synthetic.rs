//! Synthetic transaction populations with known generating processes.
//!
//! Each row is produced by one of `processes` latent posting processes.
//! Every categorical attribute takes the process's canonical value, except
//! that with probability `noise` it is replaced by a uniformly drawn value.
//! The process index is kept as a ground-truth label.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;

use crate::ingest::{AttributeKind, Column, JournalEntry, RawTable};
use crate::rng;
use crate::{Error, Result};

pub const LABEL_COLUMN: &str = "process";
pub const AMOUNT_COLUMN: &str = "amount";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub processes: usize,
    pub attributes: usize,
    pub values_per_attribute: usize,
    pub noise: f64,
    pub rows: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            processes: 4,
            attributes: 6,
            values_per_attribute: 8,
            noise: 0.05,
            rows: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub table: RawTable,
    /// Generating process of every row.
    pub labels: Vec<usize>,
}

impl SyntheticData {
    /// Names of the categorical attributes (excludes amount and label).
    pub fn attribute_columns(&self) -> Vec<Column> {
        self.table
            .columns
            .iter()
            .filter(|c| c.name != LABEL_COLUMN && c.name != AMOUNT_COLUMN)
            .cloned()
            .collect()
    }
}

pub fn attribute_name(a: usize) -> String {
    format!("attr_{a}")
}

/// Canonical value index of attribute `a` under process `g`.
fn canonical(g: usize, a: usize, values: usize, processes: usize) -> usize {
    // Distinct across processes for each attribute whenever values >= processes.
    let stride = (values / processes).max(1);
    (g * stride + a) % values
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    if spec.processes == 0 || spec.attributes == 0 || spec.rows == 0 {
        return Err(Error::invalid("synthetic spec needs processes, attributes and rows"));
    }
    if spec.values_per_attribute < spec.processes {
        return Err(Error::invalid("need at least as many values per attribute as processes"));
    }
    if !(0.0..=1.0).contains(&spec.noise) {
        return Err(Error::invalid("noise must lie in [0, 1]"));
    }
    let mut r = rng::seeded(spec.seed);
    let mut columns: Vec<Column> = (0..spec.attributes)
        .map(|a| Column {
            name: attribute_name(a),
            kind: AttributeKind::Categorical,
        })
        .collect();
    columns.push(Column {
        name: AMOUNT_COLUMN.into(),
        kind: AttributeKind::Numeric,
    });
    columns.push(Column {
        name: LABEL_COLUMN.into(),
        kind: AttributeKind::Categorical,
    });

    let mut entries = Vec::with_capacity(spec.rows);
    let mut labels = Vec::with_capacity(spec.rows);
    for i in 0..spec.rows {
        let g = r.random_range(0..spec.processes);
        let mut values = BTreeMap::new();
        for a in 0..spec.attributes {
            let v = if r.random::<f64>() < spec.noise {
                r.random_range(0..spec.values_per_attribute)
            } else {
                canonical(g, a, spec.values_per_attribute, spec.processes)
            };
            values.insert(attribute_name(a), format!("a{a}_v{v}"));
        }
        let amount = libm::round(100.0 * (g + 1) as f64 * r.random_range(0.5..1.5) * 100.0) / 100.0;
        values.insert(AMOUNT_COLUMN.into(), format!("{amount:.2}"));
        values.insert(LABEL_COLUMN.into(), format!("p{g}"));
        entries.push(JournalEntry {
            row_id: format!("{i}"),
            values,
            amount: Some(amount),
        });
        labels.push(g);
    }
    Ok(SyntheticData {
        table: RawTable { columns, entries },
        labels,
    })
}
