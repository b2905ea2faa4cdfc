use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::nn::{squared_distance, uniform_matrix, Matrix};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Floor on EMA counts when dividing the EMA sums.
pub const LAPLACE_FLOOR: f64 = 1e-5;

/// `K` embeddings of dimension `D`, plus the running EMA state that keeps
/// each embedding at the mean of the encoder outputs assigned to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    embeddings: Matrix,
    ema_counts: Vec<f64>,
    ema_sums: Matrix,
    decay: f64,
}

/// Result of a nearest-embedding lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub index: usize,
    pub squared_distance: f64,
}

impl Nearest {
    pub fn distance(&self) -> f64 {
        libm::sqrt(self.squared_distance)
    }
}

fn check_decay(decay: f64) -> Result<()> {
    if !(decay > 0.0 && decay < 1.0) {
        return Err(Error::invalid(format!("EMA decay must lie in (0, 1), got {decay}")));
    }
    Ok(())
}

impl Codebook {
    /// Codebook with the given embeddings and empty EMA state.
    pub fn new(embeddings: Matrix, decay: f64) -> Result<Self> {
        if embeddings.rows() == 0 || embeddings.cols() == 0 {
            return Err(Error::invalid("codebook needs K >= 1 and D >= 1"));
        }
        check_decay(decay)?;
        let (k, d) = (embeddings.rows(), embeddings.cols());
        Ok(Self {
            embeddings,
            ema_counts: vec![0.0; k],
            ema_sums: Matrix::zeros(k, d),
            decay,
        })
    }

    /// Embeddings drawn from `U(-1, 1)`.
    pub fn uniform(k: usize, d: usize, decay: f64, rng: &mut SeededRng) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(Error::invalid("codebook needs K >= 1 and D >= 1"));
        }
        Self::new(uniform_matrix(k, d, -1.0, 1.0, rng)?, decay)
    }

    /// Reassemble a codebook from stored state.
    pub fn from_parts(embeddings: Matrix, ema_counts: Vec<f64>, ema_sums: Matrix, decay: f64) -> Result<Self> {
        let cb = Self {
            embeddings,
            ema_counts,
            ema_sums,
            decay,
        };
        cb.validate()?;
        Ok(cb)
    }

    pub fn validate(&self) -> Result<()> {
        let (k, d) = (self.embeddings.rows(), self.embeddings.cols());
        if k == 0 || d == 0 {
            return Err(Error::InvalidState("empty codebook".into()));
        }
        check_decay(self.decay)?;
        if self.ema_counts.len() != k {
            return Err(Error::shape("ema counts", k, self.ema_counts.len()));
        }
        if self.ema_sums.rows() != k || self.ema_sums.cols() != d {
            return Err(Error::shape("ema sums", k * d, self.ema_sums.rows() * self.ema_sums.cols()));
        }
        if self.ema_counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidState("EMA counts must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.embeddings.rows()
    }

    pub fn dim(&self) -> usize {
        self.embeddings.cols()
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn embeddings(&self) -> &Matrix {
        &self.embeddings
    }

    pub fn embedding(&self, j: usize) -> &[f64] {
        self.embeddings.row(j)
    }

    pub fn ema_counts(&self) -> &[f64] {
        &self.ema_counts
    }

    pub fn ema_sums(&self) -> &Matrix {
        &self.ema_sums
    }

    /// Direct access for gradient-trained codebooks.
    pub fn embeddings_mut(&mut self) -> &mut Matrix {
        &mut self.embeddings
    }

    /// Index of the nearest embedding; ties go to the lowest index.
    pub fn nearest(&self, z: &[f64]) -> Result<Nearest> {
        if self.size() == 0 {
            return Err(Error::InvalidState("empty codebook".into()));
        }
        if z.len() != self.dim() {
            return Err(Error::shape("quantize input", self.dim(), z.len()));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("quantize input is not finite"));
        }
        let mut best = Nearest {
            index: 0,
            squared_distance: f64::INFINITY,
        };
        for (j, e) in self.embeddings.iter_rows().enumerate() {
            let d2 = squared_distance(z, e);
            if d2 < best.squared_distance {
                best = Nearest {
                    index: j,
                    squared_distance: d2,
                };
            }
        }
        Ok(best)
    }

    /// `(k, z_q)` with `z_q` the `k`-th embedding row itself.
    pub fn quantize(&self, z: &[f64]) -> Result<(usize, &[f64])> {
        let k = self.nearest(z)?.index;
        Ok((k, self.embedding(k)))
    }

    /// One-hot posterior over the `K` embeddings.
    pub fn posterior_onehot(&self, z: &[f64]) -> Result<Vec<f64>> {
        let k = self.nearest(z)?.index;
        let mut p = vec![0.0; self.size()];
        p[k] = 1.0;
        Ok(p)
    }

    /// Mini-batch EMA update of counts, sums and the assigned embeddings.
    ///
    /// `c_j ← η c_j + (1 − η) π_j` and `s_j ← η s_j + (1 − η) Σ_{k_i = j} z_i`;
    /// embeddings hit in this batch become `s_j / max(c_j, LAPLACE_FLOOR)`.
    /// Embeddings with no hits keep their value while their state decays.
    pub fn ema_update(&mut self, z_batch: &Matrix, assignments: &[usize]) -> Result<()> {
        if z_batch.rows() != assignments.len() {
            return Err(Error::shape("ema assignments", z_batch.rows(), assignments.len()));
        }
        if z_batch.cols() != self.dim() {
            return Err(Error::shape("ema latent width", self.dim(), z_batch.cols()));
        }
        let (k, d) = (self.size(), self.dim());
        let mut hits = vec![0usize; k];
        let mut sums = Matrix::zeros(k, d);
        for (z, &j) in z_batch.iter_rows().zip(assignments) {
            if j >= k {
                return Err(Error::invalid(format!("assignment {j} outside codebook of size {k}")));
            }
            hits[j] += 1;
            for (s, v) in sums.row_mut(j).iter_mut().zip(z) {
                *s += v;
            }
        }
        let eta = self.decay;
        for j in 0..k {
            self.ema_counts[j] = eta * self.ema_counts[j] + (1.0 - eta) * hits[j] as f64;
            let new_sum = sums.row(j);
            let row = self.ema_sums.row_mut(j);
            for (s, &v) in row.iter_mut().zip(new_sum) {
                *s = eta * *s + (1.0 - eta) * v;
            }
            if hits[j] > 0 {
                let denom = self.ema_counts[j].max(LAPLACE_FLOOR);
                for c in 0..d {
                    let v = self.ema_sums.get(j, c) / denom;
                    self.embeddings.set(j, c, v);
                }
            }
        }
        Ok(())
    }

    /// Move embedding `j` to `value` and reset its EMA state.
    pub fn restart(&mut self, j: usize, value: &[f64]) -> Result<()> {
        if value.len() != self.dim() {
            return Err(Error::shape("restart value", self.dim(), value.len()));
        }
        self.embeddings.row_mut(j).copy_from_slice(value);
        self.ema_counts[j] = 0.0;
        self.ema_sums.row_mut(j).fill(0.0);
        Ok(())
    }
}
