use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: AttributeKind,
}

/// One raw record. Missing categorical values are the empty string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    pub row_id: String,
    pub values: BTreeMap<String, String>,
    /// Posting amount in currency units, when an amount column is configured.
    pub amount: Option<f64>,
}

impl JournalEntry {
    pub fn get(&self, attribute: &str) -> Option<&str> {
        self.values.get(attribute).map(String::as_str)
    }
}

/// Records together with their column kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub columns: Vec<Column>,
    pub entries: Vec<JournalEntry>,
}

impl RawTable {
    /// Values of one column, in row order. Absent values read as "".
    pub fn column_values<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries.iter().map(move |e| e.get(name).unwrap_or(""))
    }
}

/// Numeric if every non-empty value parses as a number and at least one
/// value is non-empty.
pub fn infer_kind<'a, I: IntoIterator<Item = &'a str>>(values: I) -> AttributeKind {
    let mut seen = false;
    for v in values {
        let v = v.trim();
        if v.is_empty() {
            continue;
        }
        seen = true;
        if parse_number(v).is_none() {
            return AttributeKind::Categorical;
        }
    }
    if seen {
        AttributeKind::Numeric
    } else {
        AttributeKind::Categorical
    }
}

/// Parse a number, allowing thousands separators and a leading currency sign.
pub fn parse_number(s: &str) -> Option<f64> {
    let t = s.trim();
    let t = t.strip_prefix('$').unwrap_or(t);
    let cleaned: String = t.chars().filter(|&c| c != ',').collect();
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_when_all_values_parse() {
        assert_eq!(infer_kind(["1", "2.5", "", "-3"]), AttributeKind::Numeric);
        assert_eq!(infer_kind(["1", "x"]), AttributeKind::Categorical);
        assert_eq!(infer_kind(["", ""]), AttributeKind::Categorical);
        assert_eq!(infer_kind(["$1,200.50"]), AttributeKind::Numeric);
    }
}
