//! Checks shared by the focused integration tests and the acceptance run.
//! Each returns `Ok(detail)` or `Err(reason)`.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::time::Instant;

use rand::Rng;
use vqaudit_core::disentangle::{
    entropy, mutual_information, score_table, LatentTable, ProtocolParams,
};
use vqaudit_core::ingest::{AttributeSchema, EncodedDataset};
use vqaudit_core::nn::Matrix;
use vqaudit_core::rng::{self, SeededRng};
use vqaudit_core::sampling::{
    difference_estimate, extract_audit_sample, mpu_estimate, mus_sample_with_start, proportional_allocation,
    ratio_estimate, systematic_sample_with_start, AmountPair,
};
use vqaudit_core::synthetic::{generate, SyntheticSpec};
use vqaudit_core::trainer::{evaluate, QuantizationReport, TrainConfig, TrainLog, Trainer};
use vqaudit_core::vqvae::{perplexity, purity, Architecture, Codebook, LossWeights, VqVae};

pub type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- gradients

/// Mean over rows of the per-dimension mean squared error.
fn mse(x: &Matrix, y: &Matrix) -> f64 {
    let s: f64 = x.as_slice().iter().zip(y.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    s / (x.rows() * x.cols()) as f64
}

fn mean_sq_dist(a: &Matrix, b: &Matrix) -> f64 {
    let s: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(p, q)| (p - q) * (p - q)).sum();
    s / a.rows() as f64
}

fn toy_model(weights: LossWeights, seed: u64) -> VqVae {
    let arch = Architecture {
        input_width: 16,
        encoder_hidden: vec![8],
        latent_dim: 2,
        lrelu_slope: 0.4,
    };
    VqVae::new(&arch, 4, 0.95, weights, &mut rng::seeded(seed)).unwrap()
}

fn binary_batch(rows: usize, width: usize, r: &mut SeededRng) -> Matrix {
    let data = (0..rows * width).map(|_| if r.random_bool(0.3) { 1.0 } else { 0.0 }).collect();
    Matrix::from_vec(rows, width, data).unwrap()
}

struct GradCheck {
    worst: f64,
    checked: usize,
}

impl GradCheck {
    fn new() -> Self {
        Self { worst: 0.0, checked: 0 }
    }

    fn compare(&mut self, analytic: f64, numeric: f64) {
        let scale = analytic.abs().max(numeric.abs());
        if scale < 1e-7 {
            // both vanish; compare absolutely
            self.worst = self.worst.max((analytic - numeric).abs() / 1e-7);
        } else {
            self.worst = self.worst.max((analytic - numeric).abs() / scale);
        }
        self.checked += 1;
    }
}

const FD_STEP: f64 = 1e-6;

/// Central differences of `f` over every parameter of the encoder
/// (`encoder = true`) or decoder, compared with `analytic`.
fn fd_over_params(
    model: &VqVae,
    encoder: bool,
    analytic: &[Vec<f64>],
    f: &dyn Fn(&VqVae) -> f64,
    check: &mut GradCheck,
) {
    let shapes: Vec<usize> = analytic.iter().map(Vec::len).collect();
    for (b, &len) in shapes.iter().enumerate() {
        for i in 0..len {
            let mut plus = model.clone();
            let mut minus = model.clone();
            {
                let net = if encoder { plus.encoder_mut() } else { plus.decoder_mut() };
                net.param_buffers_mut()[b][i] += FD_STEP;
            }
            {
                let net = if encoder { minus.encoder_mut() } else { minus.decoder_mut() };
                net.param_buffers_mut()[b][i] -= FD_STEP;
            }
            let numeric = (f(&plus) - f(&minus)) / (2.0 * FD_STEP);
            check.compare(analytic[b][i], numeric);
        }
    }
}

fn flat(g: &vqaudit_core::nn::Gradients) -> Vec<Vec<f64>> {
    g.buffers().into_iter().map(<[f64]>::to_vec).collect()
}

/// Analytic gradients of the 16-8-2 toy model against central finite
/// differences: decoder against the true loss, encoder against the
/// straight-through surrogate (quantized point shifted along with `z_e`),
/// and the commitment term alone against the true commitment loss.
pub fn check_gradients() -> Outcome {
    let started = Instant::now();
    let weights = LossWeights {
        beta: 0.25,
        gamma: 1.0,
        ..LossWeights::default()
    };
    let mut r = rng::seeded(99);
    let mut worst = GradCheck::new();
    for seed in 0..3 {
        let model = toy_model(weights, seed);
        let x = binary_batch(6, 16, &mut r);
        let out = model.forward_backward(&x).unwrap();
        let assigned = out.assignment.indices.clone();
        let z_q0 = out.assignment.z_q.clone();
        let offset = {
            let mut d = z_q0.clone();
            d.add_scaled(&out.assignment.z_e, -1.0).unwrap();
            d
        };

        // decoder: z_e and z_q do not depend on decoder parameters
        fd_over_params(
            &model,
            false,
            &flat(&out.decoder_grads),
            &|m: &VqVae| m.loss(&x).unwrap().total,
            &mut worst,
        );

        // encoder: straight-through surrogate with frozen assignment
        let surrogate = |m: &VqVae| {
            let z_e = m.encode_batch(&x).unwrap();
            let a = m.assign_latents(z_e.clone()).unwrap();
            assert_eq!(a.indices, assigned, "finite-difference step moved an assignment");
            let mut shifted = z_e.clone();
            shifted.add_scaled(&offset, 1.0).unwrap();
            mse(&x, &m.decode_batch(&shifted).unwrap())
                + weights.beta * mean_sq_dist(&z_e, &z_q0)
                + weights.gamma * mse(&x, &m.decode_batch(&z_e).unwrap())
        };
        fd_over_params(&model, true, &flat(&out.encoder_grads), &surrogate, &mut worst);

        // commitment alone: difference of analytic gradients with and without β
        let no_commit = VqVae::from_parts(
            model.encoder().clone(),
            model.decoder().clone(),
            model.codebook().clone(),
            LossWeights { beta: 0.0, ..weights },
        )
        .unwrap();
        let base = no_commit.forward_backward(&x).unwrap();
        let commit: Vec<Vec<f64>> = flat(&out.encoder_grads)
            .iter()
            .zip(flat(&base.encoder_grads))
            .map(|(a, b)| a.iter().zip(&b).map(|(p, q)| p - q).collect())
            .collect();
        fd_over_params(&model, true, &commit, &|m: &VqVae| m.loss(&x).unwrap().commit, &mut worst);
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(worst.worst < 1e-4, || format!("max relative error {:.3e}", worst.worst))?;
    ensure(secs < 10.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "{} partials, max relative error {:.2e}, {secs:.2} s",
        worst.checked, worst.worst
    ))
}

// ------------------------------------------------------------ quantization

/// Exhaustive nearest embedding with the lowest index winning ties.
pub fn brute_nearest(codebook: &Matrix, z: &[f64]) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for j in 0..codebook.rows() {
        let e = codebook.row(j);
        let d: f64 = z.iter().zip(e).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.0 {
            best = (d, j);
        }
    }
    best.1
}

pub fn check_quantization_oracle() -> Outcome {
    let mut r = rng::seeded(7);
    let mut ties = 0usize;
    for trial in 0..10_000 {
        let k = r.random_range(1..=128);
        // every other trial on a coarse integer grid, where exact ties are common
        let grid = trial % 2 == 1;
        let draw = |r: &mut SeededRng| {
            if grid {
                r.random_range(-2i32..=2) as f64
            } else {
                r.random_range(-1.0..1.0)
            }
        };
        let data: Vec<f64> = (0..k * 2).map(|_| draw(&mut r)).collect();
        let emb = Matrix::from_vec(k, 2, data).unwrap();
        let z = [draw(&mut r), draw(&mut r)];
        let codebook = Codebook::new(emb.clone(), 0.95).unwrap();
        let (got, row) = codebook.quantize(&z).unwrap();
        let want = brute_nearest(&emb, &z);
        ensure(got == want, || format!("trial {trial}: quantize chose {got}, oracle {want}"))?;
        ensure(row == emb.row(want), || format!("trial {trial}: z_q is not the codebook row"))?;
        let dists: Vec<f64> = (0..k)
            .map(|j| z.iter().zip(emb.row(j)).map(|(a, b)| (a - b) * (a - b)).sum())
            .collect();
        let best = dists[want];
        if dists.iter().filter(|&&d| d == best).count() > 1 {
            ties += 1;
        }
    }
    Ok(format!("10000 calls exact, {ties} with tied minima"))
}

// ---------------------------------------------------------- straight-through

pub fn check_straight_through() -> Outcome {
    let weights = LossWeights {
        beta: 0.0,
        gamma: 0.0,
        ..LossWeights::default()
    };
    let mut r = rng::seeded(5);
    for trial in 0..50 {
        let model = toy_model(weights, trial);
        let rows = r.random_range(1..=32);
        let x = binary_batch(rows, 16, &mut r);
        let out = model.forward_backward(&x).unwrap();
        let a: Vec<u64> = out.encoder_output_grad.as_slice().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = out.decoder_input_grad.as_slice().iter().map(|v| v.to_bits()).collect();
        ensure(a == b, || format!("trial {trial}: gradients differ"))?;
        ensure(out.decoder_input_grad.as_slice().iter().any(|&v| v != 0.0), || {
            format!("trial {trial}: gradient is identically zero")
        })?;
    }
    Ok("50 random batches bitwise equal".into())
}

// -------------------------------------------------------------------- EMA

/// Frozen assignments and constant encoder outputs, starting from an
/// arbitrary non-zero EMA state: every used embedding converges to the
/// mean of its points.
pub fn check_ema_fixed_point() -> Outcome {
    let mut r = rng::seeded(3);
    let (k, d) = (6, 2);
    let points = 60;
    let used = [0usize, 2, 3, 5];
    let assignments: Vec<usize> = (0..points).map(|i| used[i % used.len()]).collect();
    let z = Matrix::from_vec(points, d, (0..points * d).map(|_| r.random_range(-3.0..3.0)).collect()).unwrap();
    let mut means = Matrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (i, &j) in assignments.iter().enumerate() {
        counts[j] += 1;
        for c in 0..d {
            means.set(j, c, means.get(j, c) + z.get(i, c));
        }
    }
    for j in 0..k {
        for c in 0..d {
            if counts[j] > 0 {
                means.set(j, c, means.get(j, c) / counts[j] as f64);
            }
        }
    }
    let start = Matrix::from_vec(k, d, (0..k * d).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
    let ema_counts: Vec<f64> = (0..k).map(|_| r.random_range(0.5..30.0)).collect();
    let ema_sums = Matrix::from_vec(k, d, (0..k * d).map(|_| r.random_range(-20.0..20.0)).collect()).unwrap();
    let mut cb = Codebook::from_parts(start.clone(), ema_counts, ema_sums, 0.95).unwrap();

    let error = |cb: &Codebook| {
        used.iter()
            .flat_map(|&j| (0..d).map(move |c| (j, c)))
            .map(|(j, c)| (cb.embedding(j)[c] - means.get(j, c)).abs())
            .fold(0.0, f64::max)
    };
    let mut reached = None;
    for batch in 1..=500 {
        cb.ema_update(&z, &assignments).unwrap();
        if reached.is_none() && error(&cb) < 1e-6 {
            reached = Some(batch);
        }
    }
    let final_error = error(&cb);
    ensure(reached.is_some() && final_error < 1e-6, || {
        format!("max distance to cluster mean {final_error:.3e} after 500 batches")
    })?;
    for j in [1usize, 4] {
        ensure(cb.embedding(j) == start.row(j), || format!("unused embedding {j} moved"))?;
    }
    Ok(format!(
        "within 1e-6 after {} batches, final error {final_error:.1e}",
        reached.unwrap()
    ))
}

// -------------------------------------------------------- perplexity/purity

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn check_perplexity_purity() -> Outcome {
    let uniform = perplexity(&[125; 8]).unwrap();
    ensure(close(uniform, 8.0, 1e-9), || format!("uniform K=8 gave {uniform}"))?;
    let single = perplexity(&[0, 0, 40, 0]).unwrap();
    ensure(single == 1.0, || format!("single cluster gave {single}"))?;
    // oracle: natural-log entropy of (1/4, 1/4, 1/2)
    let p: [f64; 3] = [0.25, 0.25, 0.5];
    let oracle = (-p.iter().map(|q| q * q.ln()).sum::<f64>()).exp();
    let hand = perplexity(&[2, 2, 4]).unwrap();
    ensure(close(hand, oracle, 1e-12) && close(hand, 2.828, 1e-3), || {
        format!("(2,2,4) gave {hand}, oracle {oracle}")
    })?;
    let pur = purity(&[0, 0, 0, 1], &["a", "a", "b", "c"]).unwrap();
    ensure(pur == 5.0 / 6.0, || format!("purity hand case gave {pur}"))?;
    let mut r = rng::seeded(1);
    for _ in 0..200 {
        let k = r.random_range(1..=16);
        let counts: Vec<usize> = (0..k).map(|_| r.random_range(0..50)).collect();
        if counts.iter().sum::<usize>() == 0 {
            continue;
        }
        let v = perplexity(&counts).unwrap();
        ensure((1.0..=k as f64).contains(&v), || format!("{counts:?} gave {v}"))?;
    }
    Ok(format!("uniform {uniform}, single {single}, (2,2,4) {hand:.6}, purity {pur:.6}"))
}

// ------------------------------------------------------------- synthetic

pub struct Synthetic {
    pub data: EncodedDataset,
    pub labels: Vec<usize>,
}

pub fn synthetic() -> Synthetic {
    let s = generate(&SyntheticSpec::default()).unwrap();
    let (schema, _) = AttributeSchema::fit(&s.attribute_columns(), &s.table.entries, 10).unwrap();
    let data = EncodedDataset::encode(&s.table.entries, &schema).unwrap();
    Synthetic { data, labels: s.labels }
}

pub struct GridRun {
    pub k: usize,
    pub seed: u64,
    pub model: VqVae,
    pub log: TrainLog,
    pub report: QuantizationReport,
    pub seconds: f64,
}

pub fn train_synthetic(s: &Synthetic, k: usize, seed: u64) -> GridRun {
    let config = TrainConfig {
        codebook_size: k,
        seed,
        max_epochs: 500,
        ..TrainConfig::default()
    };
    let started = Instant::now();
    let t = Trainer::new(config).run(&s.data).expect("training does not diverge");
    let seconds = started.elapsed().as_secs_f64();
    let report = evaluate(&t.model, &s.data, Some(&s.labels)).unwrap();
    GridRun {
        k,
        seed,
        model: t.model,
        log: t.log,
        report,
        seconds,
    }
}

/// K = 8 on the 4-process synthetic set: purity, perplexity, coverage of
/// every process by the audit sample, and wall time.
pub fn check_end_to_end(s: &Synthetic, run: &GridRun) -> Outcome {
    let rep = &run.report;
    let pur = rep.purity.unwrap_or(0.0);
    let sample = extract_audit_sample(&run.model, &s.data, 1).unwrap();
    let covered: BTreeSet<usize> = sample.rows().iter().map(|&r| s.labels[r]).collect();
    let processes: BTreeSet<usize> = s.labels.iter().copied().collect();
    let detail = format!(
        "purity {pur:.4}, perplexity {:.3}, {} epochs in {:.1} s, sample of {} covers processes {covered:?}",
        rep.perplexity,
        run.log.epochs(),
        run.seconds,
        sample.records.len()
    );
    ensure(pur >= 0.9, || detail.clone())?;
    ensure(rep.perplexity >= 3.5, || detail.clone())?;
    ensure(covered == processes, || detail.clone())?;
    ensure(run.seconds < 300.0, || detail.clone())?;
    Ok(detail)
}

/// Mean perplexity non-decreasing and mean quantized reconstruction loss
/// non-increasing in K, each within a 5% band.
pub fn check_capacity_trend(runs: &[GridRun]) -> Outcome {
    let mut ks: Vec<usize> = runs.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mean = |k: usize, f: fn(&QuantizationReport) -> f64| {
        let v: Vec<f64> = runs.iter().filter(|r| r.k == k).map(|r| f(&r.report)).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let ppl: Vec<f64> = ks.iter().map(|&k| mean(k, |r| r.perplexity)).collect();
    let rec: Vec<f64> = ks.iter().map(|&k| mean(k, |r| r.recon_q)).collect();
    let detail = format!(
        "K {ks:?}: mean perplexity {:?}, mean recon_q {:?}",
        ppl.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>(),
        rec.iter().map(|v| format!("{v:.5}")).collect::<Vec<_>>()
    );
    for i in 1..ks.len() {
        ensure(ppl[i] >= 0.95 * ppl[i - 1], || detail.clone())?;
        ensure(rec[i] <= 1.05 * rec[i - 1], || detail.clone())?;
    }
    Ok(detail)
}

/// Window-20 moving average of total loss from epoch 50 on never exceeds
/// its running minimum by more than 5%.
pub fn check_smoothed_loss(log: &TrainLog) -> Outcome {
    let totals: Vec<f64> = log.records.iter().map(|r| r.total).collect();
    if totals.len() < 70 {
        return Ok(format!("only {} epochs; nothing to smooth", totals.len()));
    }
    let smooth: Vec<f64> = totals.windows(20).map(|w| w.iter().sum::<f64>() / 20.0).collect();
    // smooth[i] ends at epoch i + 19
    let mut best = f64::INFINITY;
    for (i, &v) in smooth.iter().enumerate().skip(50 - 19) {
        ensure(v <= best * 1.05, || format!("epoch {}: smoothed {v:.5} vs earlier {best:.5}", i + 19))?;
        best = best.min(v);
    }
    Ok(format!("{} epochs, final smoothed loss {best:.5}", totals.len()))
}

// --------------------------------------------------------- disentanglement

fn two_factor_codes(n: usize, values: usize, r: &mut SeededRng) -> (Vec<usize>, Vec<usize>) {
    let a = (0..n).map(|_| r.random_range(0..values)).collect();
    let b = (0..n).map(|_| r.random_range(0..values)).collect();
    (a, b)
}

/// Latent dimension d carries factor d's code, plus a little jitter.
pub fn wired_table(n: usize, values: usize, seed: u64) -> LatentTable {
    let mut r = rng::seeded(seed);
    let (a, b) = two_factor_codes(n, values, &mut r);
    let z = a
        .iter()
        .zip(&b)
        .flat_map(|(&x, &y)| [x as f64, y as f64])
        .map(|v| v + r.random_range(-0.05..0.05))
        .collect();
    LatentTable::from_codes(Matrix::from_vec(n, 2, z).unwrap(), vec![a, b]).unwrap()
}

/// Latents independent of the factors.
pub fn noise_table(n: usize, values: usize, seed: u64) -> LatentTable {
    let mut r = rng::seeded(seed);
    let (a, b) = two_factor_codes(n, values, &mut r);
    let z = (0..2 * n).map(|_| r.random_range(-1.0..1.0)).collect();
    LatentTable::from_codes(Matrix::from_vec(n, 2, z).unwrap(), vec![a, b]).unwrap()
}

pub fn check_disentanglement(params: &ProtocolParams) -> Outcome {
    let good = score_table(&wired_table(20_000, 5, 1), params, 0);
    let bad = score_table(&noise_table(20_000, 5, 2), params, 0);
    let chance = 0.5;
    let show = |s: &vqaudit_core::disentangle::SeedScores| {
        format!(
            "beta {:.3} factor {:.3} mig {:.3} dci {:.3}",
            s.beta_vae.unwrap_or(f64::NAN),
            s.factor_vae.unwrap_or(f64::NAN),
            s.mig.unwrap_or(f64::NAN),
            s.dci.unwrap_or(f64::NAN)
        )
    };
    let detail = format!("wired [{}], noise [{}]", show(&good), show(&bad));
    for v in [good.beta_vae, good.factor_vae, good.mig, good.dci] {
        ensure(v.is_some_and(|v| v >= 0.9), || detail.clone())?;
    }
    for v in [bad.beta_vae, bad.factor_vae] {
        ensure(v.is_some_and(|v| v <= chance + 0.1), || detail.clone())?;
    }
    for v in [bad.mig, bad.dci] {
        ensure(v.is_some_and(|v| v <= 0.05), || detail.clone())?;
    }
    let mut r = rng::seeded(11);
    for trial in 0..500 {
        let n = r.random_range(1..400);
        let card = r.random_range(1..30);
        let x: Vec<usize> = (0..n).map(|_| r.random_range(0..card)).collect();
        let (mi, h) = (mutual_information(&x, &x), entropy(&x));
        ensure(mi == h, || format!("trial {trial}: MI(X;X) {mi} != H(X) {h}"))?;
    }
    Ok(format!("{detail}; MI(X;X) = H(X) bitwise on 500 draws"))
}

// --------------------------------------------------------------- baselines

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Rows hit by points `start + t·T`, with record `i` spanning
/// `[n·C_{i-1}, n·C_i)` in cents.
fn mus_oracle(cents: &[u64], n: usize, start: u128) -> Vec<usize> {
    let total: u128 = cents.iter().map(|&c| c as u128).sum();
    let points: Vec<u128> = (0..n as u128).map(|t| start + t * total).collect();
    let mut lo = 0u128;
    let mut out = Vec::new();
    for (i, &c) in cents.iter().enumerate() {
        let hi = lo + c as u128 * n as u128;
        if points.iter().any(|&p| p >= lo && p < hi) {
            out.push(i);
        }
        lo = hi;
    }
    out
}

fn check_mus() -> Outcome {
    let mut r = rng::seeded(21);
    let mut cases = 0usize;
    let mut certain_checks = 0usize;
    for case in 0..40 {
        let m = r.random_range(2..12);
        let cents: Vec<u64> = (0..m)
            .map(|i| if i == 0 || r.random_bool(0.2) { r.random_range(200..900) } else { r.random_range(1..120) })
            .collect();
        let amounts: Vec<Option<f64>> = cents.iter().map(|&c| Some(c as f64 / 100.0)).collect();
        let total: u64 = cents.iter().sum();
        for n in 1..=m.min(4) {
            let certain: Vec<usize> = (0..m).filter(|&i| cents[i] * n as u64 >= total).collect();
            for start in 0..total as u128 {
                let s = mus_sample_with_start(&ids(m), &amounts, n, start).map_err(|e| e.to_string())?;
                let want = mus_oracle(&cents, n, start);
                ensure(s.positions == want, || {
                    format!("case {case}, n {n}, start {start}: {:?} vs oracle {want:?}", s.positions)
                })?;
                for &i in &certain {
                    ensure(s.positions.contains(&i), || {
                        format!("case {case}, n {n}, start {start}: certain record {i} missed")
                    })?;
                    certain_checks += 1;
                }
                cases += 1;
            }
        }
    }
    ensure(certain_checks > 0, || "no certainty cases generated".into())?;
    Ok(format!("{cases} (plan, start) pairs, {certain_checks} certainty checks"))
}

fn check_systematic() -> Outcome {
    for (pop, n) in [(1000usize, 40usize), (10, 5), (97, 7), (12, 12)] {
        let interval = pop / n;
        for start in 0..interval {
            let s = systematic_sample_with_start(&ids(pop), n, start).map_err(|e| e.to_string())?;
            let want: Vec<usize> = (0..n).map(|t| start + t * interval).collect();
            ensure(s.positions == want, || format!("N {pop}, n {n}, start {start}: {:?}", s.positions))?;
        }
    }
    let hand = systematic_sample_with_start(&ids(10), 5, 1).unwrap();
    ensure(hand.positions == [1, 3, 5, 7, 9], || format!("hand case gave {:?}", hand.positions))?;
    Ok("spacing exact".into())
}

/// Largest remainder with exact rational comparison, ties to the earlier
/// stratum, written independently of the library.
fn allocation_oracle(sizes: &[usize], n: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let mut alloc: Vec<usize> = sizes.iter().map(|&s| s * n / total).collect();
    let mut left = n - alloc.iter().sum::<usize>();
    let mut taken = vec![false; sizes.len()];
    while left > 0 {
        let mut best: Option<usize> = None;
        for i in 0..sizes.len() {
            if taken[i] {
                continue;
            }
            let rem = sizes[i] * n % total;
            if best.is_none_or(|b| rem > sizes[b] * n % total) {
                best = Some(i);
            }
        }
        let b = best.unwrap();
        taken[b] = true;
        alloc[b] += 1;
        left -= 1;
    }
    alloc
}

fn check_allocation() -> Outcome {
    let hand: [(&[usize], usize, &[usize]); 4] = [
        (&[8, 2], 5, &[4, 1]),
        (&[1, 1, 1], 2, &[1, 1, 0]),
        (&[5, 3, 2], 5, &[3, 1, 1]),
        (&[50, 30, 20], 10, &[5, 3, 2]),
    ];
    for (sizes, n, want) in hand {
        let got = proportional_allocation(sizes, n).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{sizes:?}, n {n}: {got:?}, expected {want:?}"))?;
    }
    let mut r = rng::seeded(8);
    for _ in 0..2000 {
        let k = r.random_range(1..8);
        let sizes: Vec<usize> = (0..k).map(|_| r.random_range(1..60)).collect();
        let n = r.random_range(0..=sizes.iter().sum::<usize>());
        let got = proportional_allocation(&sizes, n).unwrap();
        let want = allocation_oracle(&sizes, n);
        ensure(got == want, || format!("{sizes:?}, n {n}: {got:?} vs oracle {want:?}"))?;
    }
    Ok("hand cases and 2000 random allocations".into())
}

fn check_estimators() -> Outcome {
    let pairs = |v: &[(f64, f64)]| -> Vec<AmountPair> {
        v.iter().map(|&(recorded, audited)| AmountPair { recorded, audited }).collect()
    };
    let d = difference_estimate(&pairs(&[(10.0, 9.0), (20.0, 19.0)]), 100, 1000.0).unwrap().estimate;
    let r = ratio_estimate(&pairs(&[(60.0, 50.0), (40.0, 40.0)]), 1000.0).unwrap().estimate;
    let m = mpu_estimate(&[10.0, 20.0], 100).unwrap().estimate;
    ensure(d == 900.0 && r == 900.0 && m == 1500.0, || {
        format!("difference {d}, ratio {r}, mean-per-unit {m}")
    })?;
    Ok(format!("difference {d}, ratio {r}, mean-per-unit {m}"))
}

pub fn check_baselines() -> Outcome {
    let parts = [check_mus()?, check_systematic()?, check_allocation()?, check_estimators()?];
    Ok(parts.join("; "))
}
