use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::ingest::EncodedDataset;
use crate::nn::mse_loss;
use crate::stats::MeanStd;
use crate::vqvae::{assignment_counts, perplexity, purity, VqVae, EVAL_CHUNK};
use crate::Result;

/// Reconstruction losses, codebook usage and purity of one model over a
/// whole dataset. Losses are unweighted per-dimension MSE averaged over rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizationReport {
    pub codebook_size: usize,
    pub rows: usize,
    pub recon_q: f64,
    pub recon_e: f64,
    pub perplexity: f64,
    pub purity: Option<f64>,
    pub counts: Vec<usize>,
}

/// Evaluate `model` on every row of `data`. Purity is computed when labels
/// (one per row) are given.
pub fn evaluate<L: Ord>(model: &VqVae, data: &EncodedDataset, labels: Option<&[L]>) -> Result<QuantizationReport> {
    let assignment = model.assign_dataset(data)?;
    let n = data.len();
    let rows: Vec<usize> = (0..n).collect();
    let (mut recon_q, mut recon_e) = (0.0, 0.0);
    let mut start = 0;
    for chunk in rows.chunks(EVAL_CHUNK) {
        let x = data.dense_rows(chunk);
        let ids: Vec<usize> = (start..start + chunk.len()).collect();
        let x_q = model.decode_batch(&assignment.z_q.select_rows(&ids))?;
        let x_e = model.decode_batch(&assignment.z_e.select_rows(&ids))?;
        for r in 0..chunk.len() {
            recon_q += mse_loss(x.row(r), x_q.row(r))?;
            recon_e += mse_loss(x.row(r), x_e.row(r))?;
        }
        start += chunk.len();
    }
    let counts = assignment_counts(&assignment.indices, model.codebook_size())?;
    Ok(QuantizationReport {
        codebook_size: model.codebook_size(),
        rows: n,
        recon_q: recon_q / n as f64,
        recon_e: recon_e / n as f64,
        perplexity: perplexity(&counts)?,
        purity: labels.map(|l| purity(&assignment.indices, l)).transpose()?,
        counts,
    })
}

/// Mean ± standard deviation of each metric across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub runs: usize,
    pub recon_q: MeanStd,
    pub recon_e: MeanStd,
    pub perplexity: MeanStd,
    pub purity: Option<MeanStd>,
}

pub fn aggregate_reports(reports: &[QuantizationReport]) -> Option<AggregateReport> {
    let col = |f: fn(&QuantizationReport) -> f64| MeanStd::from_values(&reports.iter().map(f).collect::<Vec<_>>());
    let purities: Option<Vec<f64>> = reports.iter().map(|r| r.purity).collect();
    Some(AggregateReport {
        runs: reports.len(),
        recon_q: col(|r| r.recon_q)?,
        recon_e: col(|r| r.recon_e)?,
        perplexity: col(|r| r.perplexity)?,
        purity: purities.and_then(|p| MeanStd::from_values(&p)),
    })
}
