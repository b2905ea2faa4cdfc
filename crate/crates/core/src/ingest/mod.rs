//! Categorical/numeric attribute schemas and one-hot encoding of journal
//! entries.
//!
//! Every attribute becomes a block of one-hot slots:
//!
//! * categorical: one slot per vocabulary value (sorted) plus a trailing
//!   slot for values not seen when the schema was fitted;
//! * numeric: one slot for non-positive or missing values followed by
//!   equal-frequency bins over the positive values.

mod dataset;
mod schema;
mod table;

pub use dataset::EncodedDataset;
pub use schema::{Attribute, AttributeEncoding, AttributeSchema, DecodedValue, DEFAULT_NUMERIC_BINS};
pub use table::{infer_kind, parse_number, AttributeKind, Column, JournalEntry, RawTable};
