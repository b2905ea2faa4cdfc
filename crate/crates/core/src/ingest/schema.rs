use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::table::{parse_number, AttributeKind, Column, JournalEntry};
use crate::{Error, Result};

pub const DEFAULT_NUMERIC_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AttributeEncoding {
    /// Sorted distinct values; the unknown slot follows the last value.
    Categorical { vocabulary: Vec<String> },
    /// Interior edges over positive values. Slot 0 holds non-positive or
    /// missing values, slot `1 + i` holds values in `[edge_{i-1}, edge_i)`.
    Numeric { bin_edges: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    #[serde(flatten)]
    pub encoding: AttributeEncoding,
}

impl Attribute {
    pub fn kind(&self) -> AttributeKind {
        match self.encoding {
            AttributeEncoding::Categorical { .. } => AttributeKind::Categorical,
            AttributeEncoding::Numeric { .. } => AttributeKind::Numeric,
        }
    }

    pub fn width(&self) -> usize {
        match &self.encoding {
            AttributeEncoding::Categorical { vocabulary } => vocabulary.len() + 1,
            AttributeEncoding::Numeric { bin_edges } => bin_edges.len() + 2,
        }
    }

    /// Slot hit by a raw value.
    pub fn slot(&self, raw: &str) -> usize {
        match &self.encoding {
            AttributeEncoding::Categorical { vocabulary } => vocabulary
                .binary_search_by(|v| v.as_str().cmp(raw))
                .unwrap_or(vocabulary.len()),
            AttributeEncoding::Numeric { bin_edges } => match parse_number(raw) {
                Some(v) if v > 0.0 => 1 + bin_edges.partition_point(|e| *e <= v),
                _ => 0,
            },
        }
    }

    pub fn decode(&self, slot: usize) -> DecodedValue {
        match &self.encoding {
            AttributeEncoding::Categorical { vocabulary } => match vocabulary.get(slot) {
                Some(v) => DecodedValue::Category(v.clone()),
                None => DecodedValue::Unknown,
            },
            AttributeEncoding::Numeric { bin_edges } => {
                if slot == 0 {
                    DecodedValue::NonPositive
                } else {
                    let i = slot - 1;
                    DecodedValue::Bin {
                        lower: if i == 0 { 0.0 } else { bin_edges[i - 1] },
                        upper: bin_edges.get(i).copied().unwrap_or(f64::INFINITY),
                    }
                }
            }
        }
    }
}

/// Human-readable meaning of a one-hot slot.
#[derive(Debug, Clone, PartialEq)]
pub enum DecodedValue {
    Category(String),
    Unknown,
    NonPositive,
    /// Positive values in `(lower, upper)` for the first bin, else `[lower, upper)`.
    Bin { lower: f64, upper: f64 },
}

impl core::fmt::Display for DecodedValue {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DecodedValue::Category(v) => f.write_str(v),
            DecodedValue::Unknown => f.write_str("<unknown>"),
            DecodedValue::NonPositive => f.write_str("<non-positive>"),
            DecodedValue::Bin { lower, upper } => write!(f, "[{lower}, {upper})"),
        }
    }
}

impl DecodedValue {
    /// Whether `raw` falls in this slot.
    pub fn contains(&self, raw: &str) -> bool {
        match self {
            DecodedValue::Category(v) => v == raw,
            DecodedValue::Unknown => false,
            DecodedValue::NonPositive => parse_number(raw).is_none_or(|v| v <= 0.0),
            DecodedValue::Bin { lower, upper } => {
                parse_number(raw).is_some_and(|v| v > 0.0 && v >= *lower && v < *upper)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub attributes: Vec<Attribute>,
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

impl AttributeSchema {
    /// Fit vocabularies and quantile bin edges. Returns the schema and any
    /// warnings about collapsed numeric bins.
    pub fn fit(columns: &[Column], entries: &[JournalEntry], numeric_bins: usize) -> Result<(Self, Vec<String>)> {
        if entries.is_empty() {
            return Err(Error::invalid("cannot fit a schema on zero entries"));
        }
        if numeric_bins < 2 {
            return Err(Error::invalid(format!("numeric_bins must be >= 2, got {numeric_bins}")));
        }
        let mut warnings = Vec::new();
        let mut attributes = Vec::with_capacity(columns.len());
        for col in columns {
            let values = entries.iter().map(|e| e.get(&col.name).unwrap_or(""));
            let encoding = match col.kind {
                AttributeKind::Categorical => {
                    let vocab: BTreeSet<&str> = values.collect();
                    AttributeEncoding::Categorical {
                        vocabulary: vocab.into_iter().map(String::from).collect(),
                    }
                }
                AttributeKind::Numeric => {
                    let mut positive: Vec<f64> = values.filter_map(parse_number).filter(|v| *v > 0.0).collect();
                    positive.sort_by(f64::total_cmp);
                    let mut edges: Vec<f64> = Vec::new();
                    if positive.is_empty() || positive[0] == positive[positive.len() - 1] {
                        warnings.push(format!(
                            "numeric attribute '{}' has no spread in positive values; using a single bin",
                            col.name
                        ));
                    } else {
                        for q in 1..numeric_bins {
                            let e = quantile_sorted(&positive, q as f64 / numeric_bins as f64);
                            if edges.last() != Some(&e) {
                                edges.push(e);
                            }
                        }
                        if edges.len() + 1 < numeric_bins {
                            warnings.push(format!(
                                "numeric attribute '{}': {} of {} bins after merging tied quantiles",
                                col.name,
                                edges.len() + 1,
                                numeric_bins
                            ));
                        }
                    }
                    AttributeEncoding::Numeric { bin_edges: edges }
                }
            };
            attributes.push(Attribute {
                name: col.name.clone(),
                encoding,
            });
        }
        Ok((Self { attributes }, warnings))
    }

    /// Total one-hot width.
    pub fn width(&self) -> usize {
        self.attributes.iter().map(Attribute::width).sum()
    }

    /// Offset of each attribute's block in the encoded row.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.attributes
            .iter()
            .map(|a| {
                let o = acc;
                acc += a.width();
                o
            })
            .collect()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    /// Check vocabulary ordering/uniqueness and edge monotonicity.
    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for a in &self.attributes {
            if !names.insert(a.name.as_str()) {
                return Err(Error::invalid(format!("duplicate attribute '{}'", a.name)));
            }
            let ok = match &a.encoding {
                AttributeEncoding::Categorical { vocabulary } => vocabulary.windows(2).all(|w| w[0] < w[1]),
                AttributeEncoding::Numeric { bin_edges } => {
                    bin_edges.windows(2).all(|w| w[0] < w[1]) && bin_edges.iter().all(|e| e.is_finite())
                }
            };
            if !ok {
                return Err(Error::invalid(format!("attribute '{}' is not sorted/unique", a.name)));
            }
        }
        Ok(())
    }

    /// SHA-256 over a canonical byte encoding, as lowercase hex.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |bytes: &[u8]| {
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        };
        for a in &self.attributes {
            put(a.name.as_bytes());
            match &a.encoding {
                AttributeEncoding::Categorical { vocabulary } => {
                    put(b"categorical");
                    for v in vocabulary {
                        put(v.as_bytes());
                    }
                }
                AttributeEncoding::Numeric { bin_edges } => {
                    put(b"numeric");
                    for e in bin_edges {
                        put(&e.to_bits().to_le_bytes());
                    }
                }
            }
            put(b"end");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
