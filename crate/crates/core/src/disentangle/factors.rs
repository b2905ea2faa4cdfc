use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::EncodedDataset;
use crate::nn::Matrix;
use crate::rng::SeededRng;
use crate::vqvae::VqVae;
use crate::{Error, Result};

/// Label of the bucket collecting values beyond the most frequent ones.
pub const OTHER_BUCKET: &str = "<other>";

/// A ground-truth factor: an attribute and the value labels its codes map to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    /// Code `i` stands for `values[i]`. A truncated factor ends with
    /// [`OTHER_BUCKET`].
    pub values: Vec<String>,
    pub truncated: bool,
}

/// Attribute names used as factors, with the top-`max_values` cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub attributes: Vec<String>,
    pub max_values: usize,
}

impl FactorSpec {
    pub fn new<S: Into<String>>(attributes: impl IntoIterator<Item = S>, max_values: usize) -> Self {
        Self {
            attributes: attributes.into_iter().map(Into::into).collect(),
            max_values,
        }
    }
}

/// Encoder outputs paired with per-row factor codes.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTable {
    latents: Matrix,
    /// `codes[f][row]`.
    codes: Vec<Vec<usize>>,
    factors: Vec<Factor>,
}

impl LatentTable {
    pub fn new(latents: Matrix, codes: Vec<Vec<usize>>, factors: Vec<Factor>) -> Result<Self> {
        if codes.len() != factors.len() {
            return Err(Error::shape("factor codes", factors.len(), codes.len()));
        }
        if codes.is_empty() {
            return Err(Error::invalid("at least one factor is required"));
        }
        for (c, f) in codes.iter().zip(&factors) {
            if c.len() != latents.rows() {
                return Err(Error::shape("factor code rows", latents.rows(), c.len()));
            }
            if f.values.len() < 2 {
                return Err(Error::invalid(format!("factor '{}' needs at least two values", f.name)));
            }
            if c.iter().any(|&v| v >= f.values.len()) {
                return Err(Error::invalid(format!("factor '{}' has an out-of-range code", f.name)));
            }
        }
        if !latents.is_finite() {
            return Err(Error::invalid("latents must be finite"));
        }
        Ok(Self {
            latents,
            codes,
            factors,
        })
    }

    /// Table over integer codes, with factors named `factor_<i>` and values
    /// `0..=max code`.
    pub fn from_codes(latents: Matrix, codes: Vec<Vec<usize>>) -> Result<Self> {
        let factors = codes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let card = c.iter().copied().max().map_or(0, |m| m + 1);
                Factor {
                    name: format!("factor_{i}"),
                    values: (0..card).map(|v| v.to_string()).collect(),
                    truncated: false,
                }
            })
            .collect();
        Self::new(latents, codes, factors)
    }

    /// Encode every row of `data` and read the factor codes from the
    /// encoded attribute slots, keeping the `max_values` most frequent values
    /// of each factor (ties by slot order) and bucketing the rest.
    pub fn from_model(model: &VqVae, data: &EncodedDataset, spec: &FactorSpec) -> Result<Self> {
        if spec.max_values < 1 {
            return Err(Error::invalid("max_values must be at least 1"));
        }
        let schema = data.schema();
        let mut codes = Vec::new();
        let mut factors = Vec::new();
        for name in &spec.attributes {
            let attr = schema
                .attribute_index(name)
                .ok_or_else(|| Error::invalid(format!("factor '{name}' is not a schema attribute")))?;
            let slots = data.attribute_slots(attr);
            let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
            for &s in &slots {
                *freq.entry(s).or_default() += 1;
            }
            let mut order: Vec<(usize, usize)> = freq.into_iter().collect();
            order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            let truncated = order.len() > spec.max_values;
            let kept = order.len().min(spec.max_values);
            let mut code_of = BTreeMap::new();
            let mut values = Vec::with_capacity(kept + 1);
            for (code, &(slot, _)) in order.iter().take(kept).enumerate() {
                code_of.insert(slot, code);
                values.push(schema.attributes[attr].decode(slot).to_string());
            }
            if truncated {
                values.push(OTHER_BUCKET.into());
            }
            codes.push(slots.iter().map(|s| code_of.get(s).copied().unwrap_or(kept)).collect());
            factors.push(Factor {
                name: name.clone(),
                values,
                truncated,
            });
        }
        let latents = model.assign_dataset(data)?.z_e;
        Self::new(latents, codes, factors)
    }

    pub fn rows(&self) -> usize {
        self.latents.rows()
    }

    pub fn dims(&self) -> usize {
        self.latents.cols()
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn latents(&self) -> &Matrix {
        &self.latents
    }

    pub fn codes(&self, factor: usize) -> &[usize] {
        &self.codes[factor]
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn cardinality(&self, factor: usize) -> usize {
        self.factors[factor].values.len()
    }
}

/// Rows sharing one value of one factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedFactorBatch {
    pub factor: usize,
    pub value: usize,
    pub rows: Vec<usize>,
}

/// `(value, member rows)` of one factor.
type ValueRows = Vec<(usize, Vec<usize>)>;

/// Which factors can produce batches, and from which values.
pub(crate) struct BatchPlan {
    /// `(factor, values)` for usable factors only.
    usable: Vec<(usize, ValueRows)>,
    batch_size: usize,
}

impl BatchPlan {
    pub(crate) fn new(table: &LatentTable, batch_size: usize, warnings: &mut Vec<String>) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        let mut usable = Vec::new();
        for f in 0..table.factor_count() {
            let mut members = vec![Vec::new(); table.cardinality(f)];
            for (row, &v) in table.codes(f).iter().enumerate() {
                members[v].push(row);
            }
            let eligible: Vec<(usize, Vec<usize>)> = members
                .into_iter()
                .enumerate()
                .filter(|(_, rows)| rows.len() >= batch_size)
                .collect();
            if eligible.is_empty() {
                warnings.push(format!(
                    "factor '{}' skipped: no value has {batch_size} rows",
                    table.factors()[f].name
                ));
            } else {
                usable.push((f, eligible));
            }
        }
        if usable.is_empty() {
            return Err(Error::invalid("no factor has enough rows for a batch"));
        }
        Ok(Self { usable, batch_size })
    }

    pub(crate) fn usable_factors(&self) -> usize {
        self.usable.len()
    }

    pub(crate) fn draw(&self, rng: &mut SeededRng) -> FixedFactorBatch {
        let (factor, values) = &self.usable[rng.random_range(0..self.usable.len())];
        let (value, members) = &values[rng.random_range(0..values.len())];
        let rows = index::sample(rng, members.len(), self.batch_size)
            .into_iter()
            .map(|i| members[i])
            .collect();
        FixedFactorBatch {
            factor: *factor,
            value: *value,
            rows,
        }
    }
}

/// `count` batches, each fixing one uniformly chosen usable factor to one
/// uniformly chosen value and drawing `batch_size` matching rows without
/// replacement. A factor is usable when some value has at least
/// `batch_size` rows; other factors are skipped with a warning.
pub fn fixed_factor_batches(
    table: &LatentTable,
    batch_size: usize,
    count: usize,
    rng: &mut SeededRng,
) -> Result<(Vec<FixedFactorBatch>, Vec<String>)> {
    let mut warnings = Vec::new();
    let plan = BatchPlan::new(table, batch_size, &mut warnings)?;
    Ok(((0..count).map(|_| plan.draw(rng)).collect(), warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn table() -> LatentTable {
        let n = 200;
        let latents = Matrix::from_vec(n, 2, (0..2 * n).map(|i| i as f64).collect()).unwrap();
        let a: Vec<usize> = (0..n).map(|i| i % 4).collect();
        // factor 1 has one frequent value and many singletons
        let b: Vec<usize> = (0..n).map(|i| if i < 150 { 0 } else { 1 + i % 50 }).collect();
        LatentTable::from_codes(latents, vec![a, b]).unwrap()
    }

    #[test]
    fn batches_share_the_fixed_value() {
        let t = table();
        let (batches, warnings) = fixed_factor_batches(&t, 16, 1000, &mut rng::seeded(1)).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(batches.len(), 1000);
        for b in &batches {
            assert_eq!(b.rows.len(), 16);
            assert!(b.rows.iter().all(|&r| t.codes(b.factor)[r] == b.value));
            let mut rows = b.rows.clone();
            rows.sort_unstable();
            rows.dedup();
            assert_eq!(rows.len(), 16);
            if b.factor == 1 {
                assert_eq!(b.value, 0);
            }
        }
    }

    #[test]
    fn single_factor_targets_are_zero() {
        let n = 64;
        let t = LatentTable::from_codes(Matrix::zeros(n, 2), vec![(0..n).map(|i| i % 2).collect()]).unwrap();
        let (batches, _) = fixed_factor_batches(&t, 16, 50, &mut rng::seeded(0)).unwrap();
        assert!(batches.iter().all(|b| b.factor == 0));
    }

    #[test]
    fn sparse_factor_is_skipped_then_fatal() {
        let n = 40;
        let sparse: Vec<usize> = (0..n).map(|i| i % 20).collect();
        let dense: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let t = LatentTable::from_codes(Matrix::zeros(n, 2), vec![sparse.clone(), dense]).unwrap();
        let (batches, warnings) = fixed_factor_batches(&t, 16, 10, &mut rng::seeded(0)).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(batches.iter().all(|b| b.factor == 1));
        let t = LatentTable::from_codes(Matrix::zeros(n, 2), vec![sparse]).unwrap();
        assert!(fixed_factor_batches(&t, 16, 10, &mut rng::seeded(0)).is_err());
    }

    #[test]
    fn constant_factor_rejected() {
        assert!(LatentTable::from_codes(Matrix::zeros(3, 2), vec![vec![0, 0, 0]]).is_err());
    }
}
