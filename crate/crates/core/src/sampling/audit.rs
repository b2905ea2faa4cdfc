use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::ingest::EncodedDataset;
use crate::nn::{squared_distance, Matrix};
use crate::vqvae::{Codebook, VqVae};
use crate::{Error, Result};

/// A row chosen to stand for one embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Representative {
    pub embedding_index: usize,
    /// 0 for the nearest row of the cluster, 1 for the runner-up, ...
    pub rank: usize,
    pub row: usize,
    pub distance: f64,
}

/// For every non-empty cluster, the `top_r` rows whose latents lie closest
/// to the cluster's embedding, nearest first. Ties go to the lower row.
/// Also returns the cluster sizes.
pub fn select_representatives(
    z_e: &Matrix,
    codebook: &Codebook,
    top_r: usize,
) -> Result<(Vec<Representative>, Vec<usize>)> {
    if top_r == 0 {
        return Err(Error::invalid("top_r must be at least 1"));
    }
    let k = codebook.size();
    let mut members: Vec<Vec<(f64, usize)>> = vec![Vec::new(); k];
    for (row, z) in z_e.iter_rows().enumerate() {
        let nearest = codebook.nearest(z)?;
        members[nearest.index].push((nearest.squared_distance, row));
    }
    let counts: Vec<usize> = members.iter().map(Vec::len).collect();
    let mut out = Vec::new();
    for (j, mut rows) in members.into_iter().enumerate() {
        // Rows arrive in ascending order, so a stable sort keeps the lower
        // row first among equal distances.
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (rank, &(d2, row)) in rows.iter().take(top_r).enumerate() {
            debug_assert_eq!(d2, squared_distance(z_e.row(row), codebook.embedding(j)));
            out.push(Representative {
                embedding_index: j,
                rank,
                row,
                distance: libm::sqrt(d2),
            });
        }
    }
    Ok((out, counts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub embedding_index: usize,
    pub rank: usize,
    /// Position of the record in the encoded dataset.
    pub row: usize,
    pub row_id: String,
    /// Raw attribute values, in schema order.
    pub values: Vec<String>,
    pub distance: f64,
    pub cluster_size: usize,
    pub cluster_share: f64,
}

/// Real records standing in for the learned embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSample {
    pub codebook_size: usize,
    pub population: usize,
    pub schema_hash: String,
    /// Attribute names matching `AuditRecord::values`.
    pub columns: Vec<String>,
    pub records: Vec<AuditRecord>,
    /// Embeddings no record was assigned to.
    pub empty_embeddings: Vec<usize>,
}

impl AuditSample {
    /// Distinct embeddings represented in the sample.
    pub fn represented(&self) -> usize {
        let mut seen: Vec<usize> = self.records.iter().map(|r| r.embedding_index).collect();
        seen.dedup();
        seen.len()
    }

    pub fn rows(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.row).collect()
    }
}

/// Pick the latent-nearest real record(s) of every non-empty embedding.
pub fn extract_audit_sample(model: &VqVae, data: &EncodedDataset, top_r: usize) -> Result<AuditSample> {
    let assignment = model.assign_dataset(data)?;
    let (reps, counts) = select_representatives(&assignment.z_e, model.codebook(), top_r)?;
    let n = data.len();
    let records = reps
        .into_iter()
        .map(|r| AuditRecord {
            embedding_index: r.embedding_index,
            rank: r.rank,
            row: r.row,
            row_id: data.row_ids()[r.row].clone(),
            values: data.raw_rows()[r.row].clone(),
            distance: r.distance,
            cluster_size: counts[r.embedding_index],
            cluster_share: counts[r.embedding_index] as f64 / n as f64,
        })
        .collect();
    Ok(AuditSample {
        codebook_size: model.codebook_size(),
        population: n,
        schema_hash: data.schema_hash(),
        columns: data.schema().attributes.iter().map(|a| a.name.clone()).collect(),
        records,
        empty_embeddings: counts.iter().enumerate().filter(|(_, &c)| c == 0).map(|(j, _)| j).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn brute_force(z: &Matrix, e: &Matrix) -> Vec<Option<usize>> {
        let assign: Vec<usize> = z
            .iter_rows()
            .map(|row| {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for j in 0..e.rows() {
                    let d: f64 = row.iter().zip(e.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d < best_d {
                        best_d = d;
                        best = j;
                    }
                }
                best
            })
            .collect();
        (0..e.rows())
            .map(|j| {
                let mut pick: Option<(f64, usize)> = None;
                for (r, &a) in assign.iter().enumerate() {
                    if a != j {
                        continue;
                    }
                    let d: f64 = z.row(r).iter().zip(e.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                    if pick.is_none_or(|(bd, _)| d < bd) {
                        pick = Some((d, r));
                    }
                }
                pick.map(|p| p.1)
            })
            .collect()
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut r = rng::seeded(5);
        for trial in 0..200 {
            let n = r.random_range(1..=60);
            let k = r.random_range(1..=12);
            // Coarse grid values make exact distance ties common.
            let grid = trial % 2 == 0;
            let draw = |r: &mut rng::SeededRng| {
                if grid {
                    r.random_range(-2i32..=2) as f64 * 0.5
                } else {
                    r.random_range(-1.0..1.0)
                }
            };
            let z = Matrix::from_vec(n, 2, (0..2 * n).map(|_| draw(&mut r)).collect()).unwrap();
            let e = Matrix::from_vec(k, 2, (0..2 * k).map(|_| draw(&mut r)).collect()).unwrap();
            let cb = Codebook::new(e.clone(), 0.95).unwrap();
            let (reps, counts) = select_representatives(&z, &cb, 1).unwrap();
            let want = brute_force(&z, &e);
            let got: Vec<Option<usize>> = (0..k)
                .map(|j| reps.iter().find(|p| p.embedding_index == j).map(|p| p.row))
                .collect();
            assert_eq!(got, want);
            assert_eq!(counts.iter().sum::<usize>(), n);
        }
    }

    #[test]
    fn top_r_orders_by_distance() {
        let z = Matrix::from_rows(&[vec![0.3, 0.0], vec![0.1, 0.0], vec![0.2, 0.0], vec![5.0, 0.0]]).unwrap();
        let cb = Codebook::new(Matrix::from_rows(&[vec![0.0, 0.0], vec![5.0, 0.0]]).unwrap(), 0.9).unwrap();
        let (reps, counts) = select_representatives(&z, &cb, 2).unwrap();
        assert_eq!(counts, vec![3, 1]);
        let rows: Vec<(usize, usize, usize)> = reps.iter().map(|r| (r.embedding_index, r.rank, r.row)).collect();
        assert_eq!(rows, vec![(0, 0, 1), (0, 1, 2), (1, 0, 3)]);
        assert_eq!(reps[2].distance, 0.0);
    }

    #[test]
    fn zero_top_r_rejected() {
        let z = Matrix::zeros(1, 2);
        let cb = Codebook::new(Matrix::zeros(1, 2), 0.9).unwrap();
        assert!(select_representatives(&z, &cb, 0).is_err());
    }
}
