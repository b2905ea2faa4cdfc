use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::schema::{AttributeSchema, DecodedValue};
use super::table::JournalEntry;
use crate::nn::Matrix;
use crate::{Error, Result};

/// One-hot encoded records with their schema and back-references.
///
/// Rows are stored as the hot column of every attribute block; dense rows
/// are materialized on demand, so memory stays `O(N · M)` rather than
/// `O(N · width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    schema: AttributeSchema,
    width: usize,
    hot: Vec<usize>,
    row_ids: Vec<String>,
    raw_rows: Vec<Vec<String>>,
    amounts: Vec<Option<f64>>,
}

impl EncodedDataset {
    /// Encode `entries` with a fitted schema. Unseen categorical values land
    /// in the attribute's unknown slot.
    pub fn encode(entries: &[JournalEntry], schema: &AttributeSchema) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("cannot encode zero entries"));
        }
        schema.validate()?;
        let offsets = schema.offsets();
        let m = schema.attributes.len();
        let mut hot = Vec::with_capacity(entries.len() * m);
        let mut raw_rows = Vec::with_capacity(entries.len());
        for (row, entry) in entries.iter().enumerate() {
            let mut raw = Vec::with_capacity(m);
            for (attr, &offset) in schema.attributes.iter().zip(&offsets) {
                let value = entry.get(&attr.name).ok_or_else(|| Error::Format {
                    row: Some(row),
                    message: format!("entry '{}' lacks attribute '{}'", entry.row_id, attr.name),
                })?;
                hot.push(offset + attr.slot(value));
                raw.push(String::from(value));
            }
            raw_rows.push(raw);
        }
        Ok(Self {
            width: schema.width(),
            schema: schema.clone(),
            hot,
            row_ids: entries.iter().map(|e| e.row_id.clone()).collect(),
            raw_rows,
            amounts: entries.iter().map(|e| e.amount).collect(),
        })
    }

    /// Rebuild from per-row local slots, e.g. when reading a stored dataset.
    pub fn from_parts(
        schema: AttributeSchema,
        slots: &[Vec<usize>],
        row_ids: Vec<String>,
        raw_rows: Vec<Vec<String>>,
        amounts: Vec<Option<f64>>,
    ) -> Result<Self> {
        schema.validate()?;
        let n = slots.len();
        if n == 0 {
            return Err(Error::invalid("encoded dataset has no rows"));
        }
        for (what, len) in [("row ids", row_ids.len()), ("raw rows", raw_rows.len()), ("amounts", amounts.len())] {
            if len != n {
                return Err(Error::Format {
                    row: None,
                    message: format!("{what}: expected {n} entries, found {len}"),
                });
            }
        }
        let m = schema.attributes.len();
        let offsets = schema.offsets();
        let mut hot = Vec::with_capacity(n * m);
        for (row, (s, raw)) in slots.iter().zip(&raw_rows).enumerate() {
            if s.len() != m || raw.len() != m {
                return Err(Error::Format {
                    row: Some(row),
                    message: format!("expected {m} attribute values"),
                });
            }
            for ((&slot, attr), &offset) in s.iter().zip(&schema.attributes).zip(&offsets) {
                if slot >= attr.width() {
                    return Err(Error::Format {
                        row: Some(row),
                        message: format!("slot {slot} out of range for attribute '{}'", attr.name),
                    });
                }
                hot.push(offset + slot);
            }
        }
        Ok(Self {
            width: schema.width(),
            schema,
            hot,
            row_ids,
            raw_rows,
            amounts,
        })
    }

    /// Local slot of every attribute for `row`.
    pub fn slots(&self, row: usize) -> Vec<usize> {
        let offsets = self.schema.offsets();
        self.hot_columns(row).iter().zip(&offsets).map(|(h, o)| h - o).collect()
    }

    pub fn len(&self) -> usize {
        self.row_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_ids.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn schema_hash(&self) -> String {
        self.schema.fingerprint()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn raw_rows(&self) -> &[Vec<String>] {
        &self.raw_rows
    }

    pub fn amounts(&self) -> &[Option<f64>] {
        &self.amounts
    }

    fn attr_count(&self) -> usize {
        self.schema.attributes.len()
    }

    /// Global indices of the hot columns of `row`, one per attribute.
    pub fn hot_columns(&self, row: usize) -> &[usize] {
        let m = self.attr_count();
        &self.hot[row * m..(row + 1) * m]
    }

    /// Local slot of attribute `attr` in `row`.
    pub fn slot(&self, row: usize, attr: usize) -> usize {
        self.hot_columns(row)[attr] - self.schema.offsets()[attr]
    }

    /// Slot of attribute `attr` for every row.
    pub fn attribute_slots(&self, attr: usize) -> Vec<usize> {
        let offset = self.schema.offsets()[attr];
        (0..self.len()).map(|r| self.hot_columns(r)[attr] - offset).collect()
    }

    pub fn dense_row(&self, row: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.width];
        for &c in self.hot_columns(row) {
            v[c] = 1.0;
        }
        v
    }

    /// Dense batch of the given rows.
    pub fn dense_rows(&self, rows: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(rows.len(), self.width);
        for (i, &r) in rows.iter().enumerate() {
            let out = m.row_mut(i);
            for &c in self.hot_columns(r) {
                out[c] = 1.0;
            }
        }
        m
    }

    /// The full `N × width` matrix. Only sensible for small datasets.
    pub fn to_matrix(&self) -> Matrix {
        let all: Vec<usize> = (0..self.len()).collect();
        self.dense_rows(&all)
    }

    /// Decode every block of `row` by its hot slot.
    pub fn decode_row(&self, row: usize) -> Vec<DecodedValue> {
        self.schema
            .attributes
            .iter()
            .enumerate()
            .map(|(a, attr)| attr.decode(self.slot(row, a)))
            .collect()
    }

    /// Decode an arbitrary dense row (e.g. a reconstruction) by taking the
    /// argmax of every block; ties go to the lowest slot.
    pub fn decode_dense(&self, row: &[f64]) -> Result<Vec<DecodedValue>> {
        if row.len() != self.width {
            return Err(Error::shape("decode width", self.width, row.len()));
        }
        let mut out = Vec::with_capacity(self.attr_count());
        for (attr, offset) in self.schema.attributes.iter().zip(self.schema.offsets()) {
            let block = &row[offset..offset + attr.width()];
            let mut best = 0;
            for (i, v) in block.iter().enumerate() {
                if *v > block[best] {
                    best = i;
                }
            }
            out.push(attr.decode(best));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AttributeEncoding, AttributeKind, Column};
    use alloc::collections::BTreeMap;

    fn entry(id: &str, pairs: &[(&str, &str)]) -> JournalEntry {
        JournalEntry {
            row_id: id.into(),
            values: pairs.iter().map(|(k, v)| (String::from(*k), String::from(*v))).collect::<BTreeMap<_, _>>(),
            amount: None,
        }
    }

    fn abc_schema() -> AttributeSchema {
        AttributeSchema {
            attributes: vec![crate::ingest::Attribute {
                name: "c".into(),
                encoding: AttributeEncoding::Categorical {
                    vocabulary: vec!["A".into(), "B".into(), "C".into()],
                },
            }],
        }
    }

    #[test]
    fn known_value_block() {
        let d = EncodedDataset::encode(&[entry("1", &[("c", "B")])], &abc_schema()).unwrap();
        assert_eq!(d.dense_row(0), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn parts_round_trip() {
        let d = EncodedDataset::encode(&[entry("1", &[("c", "B")]), entry("2", &[("c", "Q")])], &abc_schema()).unwrap();
        let slots: Vec<Vec<usize>> = (0..d.len()).map(|r| d.slots(r)).collect();
        assert_eq!(slots, vec![vec![1], vec![3]]);
        let back = EncodedDataset::from_parts(
            d.schema().clone(),
            &slots,
            d.row_ids().to_vec(),
            d.raw_rows().to_vec(),
            d.amounts().to_vec(),
        )
        .unwrap();
        assert_eq!(back, d);
        let bad = EncodedDataset::from_parts(d.schema().clone(), &[vec![4]], vec!["1".into()], vec![vec!["x".into()]], vec![None]);
        assert!(matches!(bad, Err(Error::Format { row: Some(0), .. })));
    }

    #[test]
    fn unseen_value_goes_to_unknown_slot() {
        let d = EncodedDataset::encode(&[entry("1", &[("c", "Z")])], &abc_schema()).unwrap();
        assert_eq!(d.dense_row(0), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(d.decode_row(0), vec![DecodedValue::Unknown]);
    }

    #[test]
    fn missing_attribute_is_format_error() {
        let r = EncodedDataset::encode(&[entry("1", &[("other", "x")])], &abc_schema());
        assert!(matches!(r, Err(Error::Format { row: Some(0), .. })));
    }

    #[test]
    fn empty_value_is_its_own_category() {
        let es = [entry("1", &[("c", "")]), entry("2", &[("c", "x")])];
        let cols = [Column { name: "c".into(), kind: AttributeKind::Categorical }];
        let (s, _) = AttributeSchema::fit(&cols, &es, 4).unwrap();
        let d = EncodedDataset::encode(&es, &s).unwrap();
        assert_eq!(d.decode_row(0), vec![DecodedValue::Category(String::new())]);
        assert_eq!(d.width(), 3);
    }

    #[test]
    fn dense_decode_uses_block_argmax() {
        let d = EncodedDataset::encode(&[entry("1", &[("c", "A")])], &abc_schema()).unwrap();
        let dec = d.decode_dense(&[0.1, 0.2, 0.9, 0.3]).unwrap();
        assert_eq!(dec, vec![DecodedValue::Category("C".into())]);
    }
}
