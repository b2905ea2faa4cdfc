//! CSV tables for training logs, samples, latents and metric summaries.

use std::path::Path;

use vqaudit_core::disentangle::DisentanglementReport;
use vqaudit_core::sampling::{AuditSample, BaselineSample};
use vqaudit_core::stats::MeanStd;
use vqaudit_core::trainer::{QuantizationReport, TrainLog};
use vqaudit_core::vqvae::{Assignment, Codebook};

use crate::error::Result;
use crate::fsutil::write_csv;

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One row per epoch. `with_time` controls whether wall-clock seconds are
/// written; they are left empty in deterministic runs.
pub fn write_train_log(path: &Path, log: &TrainLog, with_time: bool) -> Result<()> {
    write_csv(path, |w| {
        w.write_record([
            "epoch",
            "recon_q",
            "embed",
            "commit",
            "recon_e",
            "total",
            "perplexity",
            "seconds",
            "full_recon_q",
            "full_recon_e",
            "full_perplexity",
        ])?;
        for r in &log.records {
            let full = r.full_set;
            w.write_record([
                r.epoch.to_string(),
                num(r.recon_q),
                num(r.embed),
                num(r.commit),
                num(r.recon_e),
                num(r.total),
                num(r.perplexity),
                if with_time { num(r.seconds) } else { String::new() },
                opt(full.map(|f| f.recon_q)),
                opt(full.map(|f| f.recon_e)),
                opt(full.map(|f| f.perplexity)),
            ])?;
        }
        Ok(())
    })
}

pub fn write_audit_sample(path: &Path, sample: &AuditSample) -> Result<()> {
    write_csv(path, |w| {
        let mut header: Vec<String> = [
            "embedding_index",
            "rank",
            "row_id",
            "distance",
            "cluster_size",
            "cluster_share",
        ]
        .map(String::from)
        .to_vec();
        header.extend(sample.columns.iter().cloned());
        w.write_record(&header)?;
        for r in &sample.records {
            let mut row = vec![
                r.embedding_index.to_string(),
                r.rank.to_string(),
                r.row_id.clone(),
                num(r.distance),
                r.cluster_size.to_string(),
                num(r.cluster_share),
            ];
            row.extend(r.values.iter().cloned());
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// Selected records of a baseline sample, with optional extra columns
/// (e.g. amount or stratum) looked up by population position.
pub fn write_baseline(path: &Path, sample: &BaselineSample, extra: &[(&str, &[String])]) -> Result<()> {
    write_csv(path, |w| {
        let mut header = vec!["position".to_string(), "row_id".to_string()];
        header.extend(extra.iter().map(|(name, _)| name.to_string()));
        w.write_record(&header)?;
        for (&p, id) in sample.positions.iter().zip(&sample.row_ids) {
            let mut row = vec![p.to_string(), id.clone()];
            row.extend(extra.iter().map(|(_, values)| values[p].clone()));
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// Encoder outputs of every row with their embedding; the data behind a
/// latent-space scatter plot.
pub fn write_latents(path: &Path, row_ids: &[String], a: &Assignment, labels: Option<&[String]>) -> Result<()> {
    write_csv(path, |w| {
        let mut header = vec!["row_id".to_string()];
        header.extend((0..a.z_e.cols()).map(|k| format!("z_e_{k}")));
        header.extend(["embedding_index".to_string(), "distance".to_string()]);
        if labels.is_some() {
            header.push("label".into());
        }
        w.write_record(&header)?;
        for (r, id) in row_ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(a.z_e.row(r).iter().map(|&v| num(v)));
            row.push(a.indices[r].to_string());
            row.push(num(a.distances[r]));
            if let Some(l) = labels {
                row.push(l[r].clone());
            }
            w.write_record(&row)?;
        }
        Ok(())
    })
}

pub fn write_codebook(path: &Path, codebook: &Codebook, counts: &[usize]) -> Result<()> {
    write_csv(path, |w| {
        let mut header = vec!["index".to_string()];
        header.extend((0..codebook.dim()).map(|k| format!("e_{k}")));
        header.push("count".into());
        w.write_record(&header)?;
        for j in 0..codebook.size() {
            let mut row = vec![j.to_string()];
            row.extend(codebook.embedding(j).iter().map(|&v| num(v)));
            row.push(counts[j].to_string());
            w.write_record(&row)?;
        }
        Ok(())
    })
}

fn mean_std_cells(m: Option<MeanStd>) -> [String; 2] {
    match m {
        Some(m) => [num(m.mean), num(m.std)],
        None => [String::new(), String::new()],
    }
}

/// One row per trained model.
pub fn write_quantization_reports(path: &Path, dataset: &str, runs: &[(u64, QuantizationReport)]) -> Result<()> {
    write_csv(path, |w| {
        w.write_record(["dataset", "k", "seed", "rows", "recon_q", "recon_e", "perplexity", "purity"])?;
        for (seed, r) in runs {
            w.write_record([
                dataset.to_string(),
                r.codebook_size.to_string(),
                seed.to_string(),
                r.rows.to_string(),
                num(r.recon_q),
                num(r.recon_e),
                num(r.perplexity),
                opt(r.purity),
            ])?;
        }
        Ok(())
    })
}

/// Mean and std per codebook size across seeds.
pub fn write_quantization_summary(path: &Path, dataset: &str, runs: &[(u64, QuantizationReport)]) -> Result<()> {
    let mut sizes: Vec<usize> = runs.iter().map(|(_, r)| r.codebook_size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    write_csv(path, |w| {
        w.write_record([
            "dataset",
            "k",
            "runs",
            "recon_q_mean",
            "recon_q_std",
            "recon_e_mean",
            "recon_e_std",
            "perplexity_mean",
            "perplexity_std",
            "purity_mean",
            "purity_std",
        ])?;
        for k in sizes {
            let group: Vec<&QuantizationReport> = runs.iter().map(|(_, r)| r).filter(|r| r.codebook_size == k).collect();
            let col = |f: fn(&QuantizationReport) -> Option<f64>| {
                let v: Option<Vec<f64>> = group.iter().map(|r| f(r)).collect();
                v.and_then(|v| MeanStd::from_values(&v))
            };
            let mut row = vec![dataset.to_string(), k.to_string(), group.len().to_string()];
            row.extend(mean_std_cells(col(|r| Some(r.recon_q))));
            row.extend(mean_std_cells(col(|r| Some(r.recon_e))));
            row.extend(mean_std_cells(col(|r| Some(r.perplexity))));
            row.extend(mean_std_cells(col(|r| r.purity)));
            w.write_record(&row)?;
        }
        Ok(())
    })
}

pub fn write_disentanglement(path: &Path, dataset: &str, k: usize, report: &DisentanglementReport) -> Result<()> {
    write_csv(path, |w| {
        w.write_record([
            "dataset",
            "k",
            "seeds",
            "beta_vae_mean",
            "beta_vae_std",
            "factor_vae_mean",
            "factor_vae_std",
            "mig_mean",
            "mig_std",
            "dci_mean",
            "dci_std",
        ])?;
        let mut row = vec![dataset.to_string(), k.to_string(), report.seeds.len().to_string()];
        for m in [report.beta_vae, report.factor_vae, report.mig, report.dci] {
            row.extend(mean_std_cells(m));
        }
        w.write_record(&row)
    })
}
