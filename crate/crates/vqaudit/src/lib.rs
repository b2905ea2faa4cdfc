//! File formats, CSV loading and the `vqaudit` command line on top of
//! `vqaudit-core`.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod export;
pub mod formats;
pub mod fsutil;
pub mod manifest;

pub use error::{AppError, Result};
