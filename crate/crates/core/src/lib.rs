//! Numeric core for learning vector-quantized representations of
//! categorical transaction records and turning them into audit samples.
//!
//! Everything here is `no_std` with `alloc`: dense networks with hand-written
//! backpropagation, the quantized autoencoder and its codebook maintenance,
//! the training loop, audit-sampling baselines and estimators, and the
//! disentanglement metrics. File formats, CSV loading and the command line
//! live in the `vqaudit` companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod disentangle;
mod error;
pub mod ingest;
pub mod nn;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod synthetic;
pub mod trainer;
pub mod vqvae;

pub use error::{Error, Result};
