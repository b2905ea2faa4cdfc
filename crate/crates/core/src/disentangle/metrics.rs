use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::classifier::{LinearClassifier, MajorityVote};
use super::factors::{BatchPlan, Factor, FactorSpec, FixedFactorBatch, LatentTable};
use super::mi::{discretize_equal_width, entropy, mutual_information};
use super::tree::DecisionTree;
use crate::ingest::EncodedDataset;
use crate::nn::Matrix;
use crate::rng::{self, SeededRng};
use crate::stats::MeanStd;
use crate::vqvae::VqVae;
use crate::{Error, Result};

/// Pinned protocol choices of the four metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolParams {
    pub batch_size: usize,
    pub train_batches: usize,
    pub eval_batches: usize,
    pub classifier_iterations: usize,
    pub classifier_learning_rate: f64,
    pub mi_bins: usize,
    pub mig_samples: usize,
    pub dci_max_depth: usize,
    /// Rows the DCI trees are fit on.
    pub dci_samples: usize,
    /// Values kept per factor before bucketing the rest.
    pub max_factor_values: usize,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            batch_size: 16,
            train_batches: 1000,
            eval_batches: 500,
            classifier_iterations: 500,
            classifier_learning_rate: 0.5,
            mi_bins: 20,
            mig_samples: 1000,
            dci_max_depth: 8,
            dci_samples: 16_000,
            max_factor_values: 50,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::invalid("batch_size must be at least 2"));
        }
        if self.train_batches == 0 || self.eval_batches == 0 {
            return Err(Error::invalid("train and eval batch counts must be positive"));
        }
        if self.mi_bins == 0 || self.mig_samples == 0 || self.dci_samples == 0 {
            return Err(Error::invalid("bins and sample counts must be positive"));
        }
        if !(self.classifier_learning_rate > 0.0 && self.classifier_learning_rate.is_finite()) {
            return Err(Error::invalid("classifier_learning_rate must be positive"));
        }
        if self.max_factor_values == 0 {
            return Err(Error::invalid("max_factor_values must be at least 1"));
        }
        Ok(())
    }
}

/// A metric value in `[0, 1]` with any protocol warnings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub score: f64,
    pub warnings: Vec<String>,
}

impl MetricScore {
    fn new(score: f64, warnings: Vec<String>) -> Self {
        Self {
            score: score.clamp(0.0, 1.0),
            warnings,
        }
    }
}

fn draw_batches(plan: &BatchPlan, count: usize, rng: &mut SeededRng) -> Vec<FixedFactorBatch> {
    (0..count).map(|_| plan.draw(rng)).collect()
}

fn require_two_factors(plan: &BatchPlan) -> Result<()> {
    if plan.usable_factors() < 2 {
        return Err(Error::invalid("at least two usable factors are required"));
    }
    Ok(())
}

/// Mean absolute latent difference over disjoint consecutive row pairs.
fn pair_difference_feature(latents: &Matrix, rows: &[usize]) -> Vec<f64> {
    let d = latents.cols();
    let mut feature = vec![0.0; d];
    let pairs = rows.len() / 2;
    for p in 0..pairs {
        let (a, b) = (latents.row(rows[2 * p]), latents.row(rows[2 * p + 1]));
        for k in 0..d {
            feature[k] += libm::fabs(a[k] - b[k]);
        }
    }
    feature.iter_mut().for_each(|f| *f /= pairs as f64);
    feature
}

/// Accuracy of a linear classifier predicting the fixed factor from
/// pair-difference features of fixed-factor batches.
pub fn beta_vae_score(table: &LatentTable, params: &ProtocolParams, rng: &mut SeededRng) -> Result<MetricScore> {
    params.validate()?;
    let mut warnings = Vec::new();
    let plan = BatchPlan::new(table, params.batch_size, &mut warnings)?;
    require_two_factors(&plan)?;
    let features = |batches: &[FixedFactorBatch]| -> Result<(Matrix, Vec<usize>)> {
        let rows: Vec<Vec<f64>> = batches
            .iter()
            .map(|b| pair_difference_feature(table.latents(), &b.rows))
            .collect();
        Ok((Matrix::from_rows(&rows)?, batches.iter().map(|b| b.factor).collect()))
    };
    let (x_train, y_train) = features(&draw_batches(&plan, params.train_batches, rng))?;
    let (x_eval, y_eval) = features(&draw_batches(&plan, params.eval_batches, rng))?;
    let clf = LinearClassifier::fit(
        &x_train,
        &y_train,
        table.factor_count(),
        params.classifier_iterations,
        params.classifier_learning_rate,
    )?;
    if clf.is_degenerate() {
        warnings.push("constant batch features; scoring at chance".into());
        return Ok(MetricScore::new(1.0 / plan.usable_factors() as f64, warnings));
    }
    Ok(MetricScore::new(clf.accuracy(&x_eval, &y_eval), warnings))
}

/// Per-dimension population standard deviation of the latents.
fn latent_std(latents: &Matrix) -> Vec<f64> {
    let n = latents.rows() as f64;
    (0..latents.cols())
        .map(|k| {
            let mean = latents.iter_rows().map(|r| r[k]).sum::<f64>() / n;
            libm::sqrt(latents.iter_rows().map(|r| (r[k] - mean) * (r[k] - mean)).sum::<f64>() / n)
        })
        .collect()
}

/// Dimension of least within-batch variance after global rescaling.
fn argmin_variance_dim(latents: &Matrix, rows: &[usize], scale: &[f64]) -> usize {
    let n = rows.len() as f64;
    let mut best = (usize::MAX, f64::INFINITY);
    for (k, &s) in scale.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        let mean = rows.iter().map(|&r| latents.get(r, k) / s).sum::<f64>() / n;
        let var = rows
            .iter()
            .map(|&r| {
                let d = latents.get(r, k) / s - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        if var < best.1 {
            best = (k, var);
        }
    }
    best.0
}

/// Accuracy of a majority-vote table mapping the least-varying normalized
/// latent dimension of each fixed-factor batch to the fixed factor.
pub fn factor_vae_score(table: &LatentTable, params: &ProtocolParams, rng: &mut SeededRng) -> Result<MetricScore> {
    params.validate()?;
    let mut warnings = Vec::new();
    let plan = BatchPlan::new(table, params.batch_size, &mut warnings)?;
    require_two_factors(&plan)?;
    let scale = latent_std(table.latents());
    for (k, _) in scale.iter().enumerate().filter(|(_, &s)| s == 0.0) {
        warnings.push(format!("latent dimension {k} is constant and excluded"));
    }
    if scale.iter().all(|&s| s == 0.0) {
        warnings.push("no varying latent dimension; scoring at chance".into());
        return Ok(MetricScore::new(1.0 / plan.usable_factors() as f64, warnings));
    }
    let votes = |batches: &[FixedFactorBatch]| -> Vec<(usize, usize)> {
        batches
            .iter()
            .map(|b| (argmin_variance_dim(table.latents(), &b.rows, &scale), b.factor))
            .collect()
    };
    let train = votes(&draw_batches(&plan, params.train_batches, rng));
    let eval = votes(&draw_batches(&plan, params.eval_batches, rng));
    let vote = MajorityVote::fit(&train, table.dims(), table.factor_count())?;
    Ok(MetricScore::new(vote.accuracy(&eval), warnings))
}

fn sample_rows(n: usize, want: usize, rng: &mut SeededRng) -> Vec<usize> {
    if want >= n {
        return (0..n).collect();
    }
    let mut rows = index::sample(rng, n, want).into_vec();
    rows.sort_unstable();
    rows
}

/// Mean over factors of the normalized gap between the two latent
/// dimensions sharing the most information with the factor.
pub fn mig_score(table: &LatentTable, params: &ProtocolParams, rng: &mut SeededRng) -> Result<MetricScore> {
    params.validate()?;
    let rows = sample_rows(table.rows(), params.mig_samples, rng);
    let mut warnings = Vec::new();
    if rows.len() < params.mig_samples {
        warnings.push(format!("only {} rows available for MIG", rows.len()));
    }
    let binned: Vec<Vec<usize>> = (0..table.dims())
        .map(|k| {
            let values: Vec<f64> = rows.iter().map(|&r| table.latents().get(r, k)).collect();
            discretize_equal_width(&values, params.mi_bins)
        })
        .collect();
    let mut gaps = Vec::new();
    for f in 0..table.factor_count() {
        let codes: Vec<usize> = rows.iter().map(|&r| table.codes(f)[r]).collect();
        let h = entropy(&codes);
        if h == 0.0 {
            warnings.push(format!("factor '{}' is constant in the sample and skipped", table.factors()[f].name));
            continue;
        }
        let mut mi: Vec<f64> = binned.iter().map(|b| mutual_information(b, &codes)).collect();
        mi.sort_by(|a, b| b.total_cmp(a));
        let second = mi.get(1).copied().unwrap_or(0.0);
        gaps.push((mi[0] - second) / h);
    }
    if gaps.is_empty() {
        return Err(Error::invalid("every factor has zero entropy"));
    }
    Ok(MetricScore::new(gaps.iter().sum::<f64>() / gaps.len() as f64, warnings))
}

/// Importance-weighted mean of per-dimension disentanglement
/// `1 − H(row of R) / log(F)` over an importance matrix `R` (dims × factors).
pub fn dci_from_importance(importance: &Matrix) -> MetricScore {
    let f = importance.cols();
    let total: f64 = importance.as_slice().iter().sum();
    if !(total > 0.0) {
        return MetricScore::new(0.0, vec!["all importances are zero".into()]);
    }
    let mut score = 0.0;
    for row in importance.iter_rows() {
        let s: f64 = row.iter().sum();
        if s <= 0.0 {
            continue;
        }
        let d = if f == 1 {
            1.0
        } else {
            let h: f64 = row
                .iter()
                .filter(|&&v| v > 0.0)
                .map(|&v| {
                    let p = v / s;
                    -p * libm::log(p) / libm::log(f as f64)
                })
                .sum();
            1.0 - h
        };
        score += s / total * d;
    }
    MetricScore::new(score, Vec::new())
}

/// Disentanglement score from the Gini importances of one decision tree per
/// factor, each predicting the factor from the latents.
pub fn dci_score(table: &LatentTable, params: &ProtocolParams, rng: &mut SeededRng) -> Result<MetricScore> {
    params.validate()?;
    let rows = sample_rows(table.rows(), params.dci_samples, rng);
    let x = table.latents().select_rows(&rows);
    let mut importance = Matrix::zeros(table.dims(), table.factor_count());
    for f in 0..table.factor_count() {
        let y: Vec<usize> = rows.iter().map(|&r| table.codes(f)[r]).collect();
        let tree = DecisionTree::fit(&x, &y, table.cardinality(f), params.dci_max_depth)?;
        let column: f64 = tree.importances().iter().sum();
        if column > 0.0 {
            for (k, &v) in tree.importances().iter().enumerate() {
                importance.set(k, f, v / column);
            }
        }
    }
    Ok(dci_from_importance(&importance))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFailure {
    pub metric: String,
    pub kind: String,
    pub message: String,
}

/// The four scores of one seed; a failed metric is `None` and listed in
/// `failures`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedScores {
    pub seed: u64,
    pub beta_vae: Option<f64>,
    pub factor_vae: Option<f64>,
    pub mig: Option<f64>,
    pub dci: Option<f64>,
    pub warnings: Vec<String>,
    pub failures: Vec<MetricFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisentanglementReport {
    pub protocol: ProtocolParams,
    pub factors: Vec<Factor>,
    pub rows: usize,
    pub seeds: Vec<SeedScores>,
    pub beta_vae: Option<MeanStd>,
    pub factor_vae: Option<MeanStd>,
    pub mig: Option<MeanStd>,
    pub dci: Option<MeanStd>,
}

type MetricFn = fn(&LatentTable, &ProtocolParams, &mut SeededRng) -> Result<MetricScore>;

const METRICS: [(&str, MetricFn); 4] = [
    ("beta_vae", beta_vae_score),
    ("factor_vae", factor_vae_score),
    ("mig", mig_score),
    ("dci", dci_score),
];

/// All four metrics for one table. Each metric draws from its own stream of
/// `seed`, so results do not depend on which metrics run.
pub fn score_table(table: &LatentTable, params: &ProtocolParams, seed: u64) -> SeedScores {
    let mut out = SeedScores {
        seed,
        beta_vae: None,
        factor_vae: None,
        mig: None,
        dci: None,
        warnings: Vec::new(),
        failures: Vec::new(),
    };
    for (i, (name, metric)) in METRICS.iter().enumerate() {
        let mut r = rng::stream(seed, i as u64);
        match metric(table, params, &mut r) {
            Ok(s) => {
                out.warnings.extend(s.warnings.into_iter().map(|w| format!("{name}: {w}")));
                let slot = match i {
                    0 => &mut out.beta_vae,
                    1 => &mut out.factor_vae,
                    2 => &mut out.mig,
                    _ => &mut out.dci,
                };
                *slot = Some(s.score);
            }
            Err(e) => out.failures.push(MetricFailure {
                metric: name.to_string(),
                kind: e.kind().into(),
                message: e.to_string(),
            }),
        }
    }
    out
}

/// Score every `(seed, table)` and aggregate mean ± std per metric.
pub fn run_all_metrics_on_tables(tables: &[(u64, &LatentTable)], params: &ProtocolParams) -> Result<DisentanglementReport> {
    params.validate()?;
    let first = tables.first().ok_or_else(|| Error::invalid("no representations to score"))?.1;
    let seeds: Vec<SeedScores> = tables.iter().map(|(s, t)| score_table(t, params, *s)).collect();
    let agg = |get: fn(&SeedScores) -> Option<f64>| {
        let v: Vec<f64> = seeds.iter().filter_map(get).collect();
        MeanStd::from_values(&v)
    };
    Ok(DisentanglementReport {
        protocol: params.clone(),
        factors: first.factors().to_vec(),
        rows: first.rows(),
        beta_vae: agg(|s| s.beta_vae),
        factor_vae: agg(|s| s.factor_vae),
        mig: agg(|s| s.mig),
        dci: agg(|s| s.dci),
        seeds,
    })
}

/// Encode `data` with each seed's model and score the latents.
pub fn run_all_metrics(
    models: &[(u64, &VqVae)],
    data: &EncodedDataset,
    factors: &[String],
    params: &ProtocolParams,
) -> Result<DisentanglementReport> {
    let spec = FactorSpec::new(factors.iter().cloned(), params.max_factor_values);
    let tables = models
        .iter()
        .map(|(s, m)| Ok((*s, LatentTable::from_model(m, data, &spec)?)))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<(u64, &LatentTable)> = tables.iter().map(|(s, t)| (*s, t)).collect();
    run_all_metrics_on_tables(&refs, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Dimension d equals factor d's code; factors are independent.
    pub(crate) fn wired(n: usize, values: usize, seed: u64) -> LatentTable {
        let mut r = rng::seeded(seed);
        let a: Vec<usize> = (0..n).map(|_| r.random_range(0..values)).collect();
        let b: Vec<usize> = (0..n).map(|_| r.random_range(0..values)).collect();
        let z = a.iter().zip(&b).flat_map(|(&x, &y)| [x as f64, y as f64]).collect();
        LatentTable::from_codes(Matrix::from_vec(n, 2, z).unwrap(), vec![a, b]).unwrap()
    }

    pub(crate) fn noise(n: usize, values: usize, seed: u64) -> LatentTable {
        let mut r = rng::seeded(seed);
        let a: Vec<usize> = (0..n).map(|_| r.random_range(0..values)).collect();
        let b: Vec<usize> = (0..n).map(|_| r.random_range(0..values)).collect();
        let z = (0..2 * n).map(|_| r.random_range(-1.0..1.0)).collect();
        LatentTable::from_codes(Matrix::from_vec(n, 2, z).unwrap(), vec![a, b]).unwrap()
    }

    fn quick() -> ProtocolParams {
        ProtocolParams {
            train_batches: 300,
            eval_batches: 200,
            classifier_iterations: 200,
            dci_samples: 2000,
            ..Default::default()
        }
    }

    #[test]
    fn dci_uniform_and_one_hot() {
        let uniform = Matrix::from_vec(2, 2, vec![0.5; 4]).unwrap();
        assert!(dci_from_importance(&uniform).score.abs() < 1e-12);
        let one_hot = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(dci_from_importance(&one_hot).score, 1.0);
        let single = Matrix::from_vec(2, 1, vec![1.0, 0.0]).unwrap();
        assert_eq!(dci_from_importance(&single).score, 1.0);
        let zero = dci_from_importance(&Matrix::zeros(2, 2));
        assert_eq!(zero.score, 0.0);
        assert_eq!(zero.warnings.len(), 1);
    }

    #[test]
    fn mig_permutation_invariant() {
        let t = wired(3000, 4, 1);
        let swapped = {
            let z = t.latents().iter_rows().flat_map(|r| [r[1], r[0]]).collect();
            LatentTable::from_codes(
                Matrix::from_vec(t.rows(), 2, z).unwrap(),
                vec![t.codes(0).to_vec(), t.codes(1).to_vec()],
            )
            .unwrap()
        };
        let p = quick();
        let a = mig_score(&t, &p, &mut rng::seeded(3)).unwrap().score;
        let b = mig_score(&swapped, &p, &mut rng::seeded(3)).unwrap().score;
        assert_eq!(a, b);
    }

    #[test]
    fn wired_scores_high_noise_scores_low() {
        let p = quick();
        let good = score_table(&wired(4000, 4, 2), &p, 0);
        for s in [good.beta_vae, good.factor_vae, good.mig, good.dci] {
            assert!(s.unwrap() >= 0.9, "{good:?}");
        }
        let bad = score_table(&noise(4000, 4, 2), &p, 0);
        assert!(bad.beta_vae.unwrap() <= 0.6, "{bad:?}");
        assert!(bad.factor_vae.unwrap() <= 0.6, "{bad:?}");
        assert!(bad.mig.unwrap() <= 0.05, "{bad:?}");
        assert!(bad.dci.unwrap() <= 0.05, "{bad:?}");
    }

    #[test]
    fn factor_vae_vote_table_bounded_by_dims() {
        let t = noise(2000, 3, 5);
        let p = quick();
        let mut warnings = Vec::new();
        let plan = BatchPlan::new(&t, p.batch_size, &mut warnings).unwrap();
        let scale = latent_std(t.latents());
        let votes: Vec<(usize, usize)> = draw_batches(&plan, 100, &mut rng::seeded(0))
            .iter()
            .map(|b| (argmin_variance_dim(t.latents(), &b.rows, &scale), b.factor))
            .collect();
        assert!(MajorityVote::fit(&votes, 2, 2).unwrap().entries() <= 2);
    }

    #[test]
    fn single_seed_has_zero_spread() {
        let t = wired(2000, 3, 8);
        let r = run_all_metrics_on_tables(&[(4, &t)], &quick()).unwrap();
        for m in [r.beta_vae, r.factor_vae, r.mig, r.dci] {
            assert_eq!(m.unwrap().std, 0.0);
        }
    }

    #[test]
    fn constant_latents_score_chance() {
        let mut t = noise(500, 2, 1);
        t = LatentTable::new(Matrix::zeros(500, 2), vec![t.codes(0).to_vec(), t.codes(1).to_vec()], t.factors().to_vec())
            .unwrap();
        let p = quick();
        assert_eq!(beta_vae_score(&t, &p, &mut rng::seeded(0)).unwrap().score, 0.5);
        assert_eq!(factor_vae_score(&t, &p, &mut rng::seeded(0)).unwrap().score, 0.5);
    }
}
