use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use vqaudit_core::disentangle::run_all_metrics;
use vqaudit_core::ingest::parse_number;
use vqaudit_core::sampling::{
    difference_estimate, extract_audit_sample, mpu_estimate, mus_sample, proportional_allocation, random_sample,
    ratio_estimate, stratified_sample, systematic_sample, AmountPair, BaselineSample,
};
use vqaudit_core::synthetic::{self, SyntheticSpec};
use vqaudit_core::trainer::{aggregate_reports, evaluate, EpochRecord, QuantizationReport, TrainConfig, Trainer};
use vqaudit_core::vqvae::assignment_counts;

use crate::config::RunConfig;
use crate::data::{prepare, Prepared};
use crate::error::{exit, AppError, Result};
use crate::export;
use crate::formats::{write_encoded, Checkpoint, SchemaFile};
use crate::fsutil::{write_csv, write_json};
use crate::manifest::{DatasetFingerprint, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "vqaudit", version, about = "Learn a vector-quantized representation of journal entries and draw audit samples from it")]
pub struct Cli {
    /// Directory receiving all output files and the run manifest.
    #[arg(long, global = true, default_value = "vqaudit-out")]
    pub out: PathBuf,
    /// Worker threads for multi-seed training.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Keep wall-clock timings out of data files so reruns are byte-identical.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set,
          num_args = 0..=1, default_missing_value = "true")]
    pub deterministic: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the schema and write the one-hot encoded dataset.
    Encode(ConfigArg),
    /// Train one model per seed; writes checkpoints, training logs and reports.
    Train(TrainArgs),
    /// Reconstruction losses, perplexity and purity of trained checkpoints.
    Report(ReportArgs),
    /// Draw an audit sample from a model or a statistical baseline sample.
    Sample(SampleArgs),
    /// Project audited amounts of a sample onto the population.
    Estimate(EstimateArgs),
    /// Disentanglement scores of trained checkpoints.
    Metrics(MetricsArgs),
    /// Write encoder outputs and the codebook for scatter plots.
    ExportLatent(CheckpointArgs),
    /// Write a synthetic dataset with known generating processes and a config for it.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Seed for a single run; overrides the config.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Comma-separated seeds; one model per seed.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Codebook size; overrides the config.
    #[arg(long)]
    pub k: Option<usize>,
    /// Epoch budget; overrides the config.
    #[arg(long)]
    pub max_epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Checkpoint files to evaluate.
    #[arg(long, required = true, num_args = 1..)]
    pub checkpoint: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleMethod {
    Vq,
    Random,
    Systematic,
    Stratified,
    Mus,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub method: SampleMethod,
    /// Trained model (required for `vq`).
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Sample size (baselines).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Records per embedding for `vq`; overrides the config.
    #[arg(long)]
    pub top_r: Option<usize>,
    /// Stratum column for `stratified`; defaults to the label column.
    #[arg(long)]
    pub strata_column: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateKind {
    Difference,
    Ratio,
    Mpu,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, value_enum)]
    pub method: EstimateKind,
    /// CSV with recorded and audited amounts of the sampled records.
    #[arg(long)]
    pub input: PathBuf,
    /// Take population size and recorded total from this dataset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub population_size: Option<usize>,
    #[arg(long)]
    pub population_total: Option<f64>,
    #[arg(long, default_value = "recorded")]
    pub recorded_column: String,
    #[arg(long, default_value = "audited")]
    pub audited_column: String,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, required = true, num_args = 1..)]
    pub checkpoint: Vec<PathBuf>,
    /// Comma-separated factor attributes; overrides the config.
    #[arg(long, value_delimiter = ',')]
    pub factors: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct CheckpointArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10_000)]
    pub rows: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub processes: usize,
    #[arg(long, default_value_t = 6)]
    pub attributes: usize,
    #[arg(long, default_value_t = 8)]
    pub values: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
}

/// Parse arguments, run, and map the outcome to an exit code. Errors are
/// reported on stderr, the last line being a JSON object.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code != 0 {
                let err = AppError::Usage(e.kind().to_string());
                eprintln!("{}", err.to_json_line());
            }
            return code;
        }
    };
    let argv = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli, argv) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.exit_code()
        }
    }
}

struct Ctx {
    out: PathBuf,
    jobs: usize,
    deterministic: bool,
    manifest: RunManifest,
}

impl Ctx {
    fn output(&mut self, rel: impl Into<PathBuf>) -> PathBuf {
        let rel = rel.into();
        self.manifest.outputs.push(rel.clone());
        self.out.join(rel)
    }

    fn finish(self) -> Result<()> {
        let path = self.manifest.finish(&self.out)?;
        println!("manifest: {}", path.display());
        Ok(())
    }
}

pub fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    if cli.jobs == 0 {
        return Err(AppError::Usage("--jobs must be at least 1".into()));
    }
    let name = match &cli.command {
        Command::Encode(_) => "encode",
        Command::Train(_) => "train",
        Command::Report(_) => "report",
        Command::Sample(_) => "sample",
        Command::Estimate(_) => "estimate",
        Command::Metrics(_) => "metrics",
        Command::ExportLatent(_) => "export-latent",
        Command::Synth(_) => "synth",
    };
    let mut ctx = Ctx {
        out: cli.out.clone(),
        jobs: cli.jobs,
        deterministic: cli.deterministic,
        manifest: RunManifest::new(name, argv, cli.deterministic),
    };
    std::fs::create_dir_all(&ctx.out).map_err(|e| AppError::io(&ctx.out, e))?;
    match cli.command {
        Command::Encode(a) => encode(&mut ctx, &a),
        Command::Train(a) => train(&mut ctx, &a),
        Command::Report(a) => report(&mut ctx, &a),
        Command::Sample(a) => sample(&mut ctx, &a),
        Command::Estimate(a) => estimate(&mut ctx, &a),
        Command::Metrics(a) => metrics(&mut ctx, &a),
        Command::ExportLatent(a) => export_latent(&mut ctx, &a),
        Command::Synth(a) => synth(&mut ctx, &a),
    }?;
    ctx.finish()
}

fn snapshot<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).unwrap_or(serde_json::Value::Null)
}

fn dataset_name(config: &Path) -> String {
    config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn load(ctx: &mut Ctx, config: &Path) -> Result<(RunConfig, Prepared)> {
    let cfg = RunConfig::load(config)?;
    let prep = prepare(&cfg.dataset)?;
    for w in &prep.warnings {
        eprintln!("warning: {w}");
    }
    ctx.manifest.config = snapshot(&cfg);
    ctx.manifest.dataset = Some(DatasetFingerprint::of(&prep.dataset));
    Ok((cfg, prep))
}

fn load_checkpoint(path: &Path, prep: &Prepared) -> Result<Checkpoint> {
    let ck = Checkpoint::load(path)?;
    ck.check_data(&prep.dataset)?;
    Ok(ck)
}

fn encode(ctx: &mut Ctx, a: &ConfigArg) -> Result<()> {
    let (_, prep) = load(ctx, &a.config)?;
    let d = &prep.dataset;
    write_json(&ctx.output("schema.json"), &SchemaFile::new(d.schema()))?;
    write_encoded(&ctx.output("encoded.json"), d)?;
    println!(
        "encoded {} rows into {} one-hot dimensions over {} attributes (schema {})",
        d.len(),
        d.width(),
        d.schema().attributes.len(),
        &d.schema_hash()[..12]
    );
    Ok(())
}

/// Apply `f` to every item on up to `jobs` threads; results keep item order.
fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(items.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                results.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every item processed"))
        .collect()
}

struct SeedOutcome {
    seed: u64,
    result: std::result::Result<(Checkpoint, vqaudit_core::trainer::TrainLog, QuantizationReport), AppError>,
}

fn train(ctx: &mut Ctx, a: &TrainArgs) -> Result<()> {
    let (mut cfg, prep) = load(ctx, &a.config)?;
    if let Some(k) = a.k {
        cfg.train.codebook_size = k;
    }
    if let Some(e) = a.max_epochs {
        cfg.train.max_epochs = e;
    }
    if let Some(s) = a.seed {
        cfg.train.seed = s;
    }
    cfg.validate().map_err(|m| AppError::config(&a.config, m))?;
    ctx.manifest.config = snapshot(&cfg);
    let seeds = a.seeds.clone().unwrap_or_else(|| vec![cfg.train.seed]);
    if seeds.is_empty() {
        return Err(AppError::Usage("--seeds needs at least one seed".into()));
    }
    ctx.manifest.seeds = seeds.clone();
    let labels = prep.labels(&cfg.dataset);
    let deterministic = ctx.deterministic;
    let data = &prep.dataset;

    let outcomes = parallel_map(&seeds, ctx.jobs, |&seed| {
        let config = TrainConfig { seed, ..cfg.train.clone() };
        let started = Instant::now();
        let clock = move || started.elapsed().as_secs_f64();
        let every = config.metrics_every;
        let mut progress = |r: &EpochRecord| {
            if let Some(f) = r.full_set.filter(|_| (r.epoch + 1) % every == 0) {
                eprintln!(
                    "seed {seed} epoch {}: loss {:.5} recon_q {:.5} perplexity {:.3}",
                    r.epoch + 1,
                    r.total,
                    f.recon_q,
                    f.perplexity
                );
            }
        };
        let mut trainer = Trainer::new(config.clone()).with_observer(&mut progress);
        if !deterministic {
            trainer = trainer.with_clock(&clock);
        }
        let result = trainer
            .run(data)
            .map_err(|f| AppError::Core(f.error))
            .and_then(|t| {
                let rep = evaluate(&t.model, data, labels.as_deref())?;
                Ok((Checkpoint::new(t.model, data.schema(), &config, &t.log), t.log, rep))
            });
        SeedOutcome { seed, result }
    });

    let nested = seeds.len() > 1;
    let mut reports = Vec::new();
    let mut first_error = None;
    for o in outcomes {
        let dir = if nested { PathBuf::from(format!("seed-{}", o.seed)) } else { PathBuf::new() };
        match o.result {
            Ok((ck, log, rep)) => {
                ck.save(&ctx.output(dir.join("checkpoint.json")))?;
                export::write_train_log(&ctx.output(dir.join("train_log.csv")), &log, !deterministic)?;
                write_json(&ctx.output(dir.join("report.json")), &rep)?;
                println!(
                    "seed {}: {} epochs{}, recon_q {:.5}, recon_e {:.5}, perplexity {:.3}{}",
                    o.seed,
                    log.epochs(),
                    if log.stopped_early { " (early stop)" } else { "" },
                    rep.recon_q,
                    rep.recon_e,
                    rep.perplexity,
                    rep.purity.map(|p| format!(", purity {p:.3}")).unwrap_or_default()
                );
                reports.push((o.seed, rep));
            }
            Err(e) => {
                eprintln!("seed {} failed: {e}", o.seed);
                first_error.get_or_insert(e);
            }
        }
    }
    let name = dataset_name(&a.config);
    if !reports.is_empty() {
        export::write_quantization_reports(&ctx.output("report.csv"), &name, &reports)?;
        export::write_quantization_summary(&ctx.output("summary.csv"), &name, &reports)?;
        let only: Vec<QuantizationReport> = reports.iter().map(|(_, r)| r.clone()).collect();
        write_json(&ctx.output("summary.json"), &aggregate_reports(&only))?;
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct CheckpointReport {
    checkpoint: PathBuf,
    seed: u64,
    report: QuantizationReport,
}

fn report(ctx: &mut Ctx, a: &ReportArgs) -> Result<()> {
    let (cfg, prep) = load(ctx, &a.config)?;
    let labels = prep.labels(&cfg.dataset);
    let mut rows = Vec::new();
    let mut detail = Vec::new();
    for path in &a.checkpoint {
        let ck = load_checkpoint(path, &prep)?;
        let rep = evaluate(&ck.model, &prep.dataset, labels.as_deref())?;
        println!(
            "{}: K={} recon_q {:.5} recon_e {:.5} perplexity {:.3}{}",
            path.display(),
            rep.codebook_size,
            rep.recon_q,
            rep.recon_e,
            rep.perplexity,
            rep.purity.map(|p| format!(" purity {p:.3}")).unwrap_or_default()
        );
        ctx.manifest.seeds.push(ck.seed);
        rows.push((ck.seed, rep.clone()));
        detail.push(CheckpointReport {
            checkpoint: path.clone(),
            seed: ck.seed,
            report: rep,
        });
    }
    let name = dataset_name(&a.config);
    write_json(&ctx.output("report.json"), &detail)?;
    export::write_quantization_reports(&ctx.output("report.csv"), &name, &rows)?;
    export::write_quantization_summary(&ctx.output("summary.csv"), &name, &rows)?;
    Ok(())
}

fn require_n(a: &SampleArgs) -> Result<usize> {
    a.n.ok_or_else(|| AppError::Usage("--n is required for baseline samples".into()))
}

fn sample(ctx: &mut Ctx, a: &SampleArgs) -> Result<()> {
    let (cfg, prep) = load(ctx, &a.config)?;
    let data = &prep.dataset;
    let ids = data.row_ids();
    let baseline: BaselineSample;
    let mut extra: Vec<(String, Vec<String>)> = Vec::new();
    match a.method {
        SampleMethod::Vq => {
            let path = a
                .checkpoint
                .as_ref()
                .ok_or_else(|| AppError::Usage("--checkpoint is required for --method vq".into()))?;
            let ck = load_checkpoint(path, &prep)?;
            ctx.manifest.seeds.push(ck.seed);
            let top_r = a.top_r.unwrap_or(cfg.sampling.top_r);
            let s = extract_audit_sample(&ck.model, data, top_r)?;
            export::write_audit_sample(&ctx.output("sample.csv"), &s)?;
            write_json(&ctx.output("sample.json"), &s)?;
            println!(
                "audit sample: {} records covering {} of {} embeddings ({} empty)",
                s.records.len(),
                s.represented(),
                s.codebook_size,
                s.empty_embeddings.len()
            );
            return Ok(());
        }
        SampleMethod::Random => baseline = random_sample(ids, require_n(a)?, a.seed)?,
        SampleMethod::Systematic => baseline = systematic_sample(ids, require_n(a)?, a.seed)?,
        SampleMethod::Stratified => {
            let column = a.strata_column.clone().or(cfg.dataset.label_column.clone()).ok_or_else(|| {
                AppError::Usage("--strata-column is required when the config has no label column".into())
            })?;
            if !prep.table.entries[0].values.contains_key(&column) {
                return Err(AppError::Usage(format!("strata column '{column}' is not a CSV column")));
            }
            let strata = prep.column(&column);
            let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
            for s in &strata {
                *sizes.entry(s).or_default() += 1;
            }
            let counts: Vec<usize> = sizes.values().copied().collect();
            let alloc = proportional_allocation(&counts, require_n(a)?)?;
            let allocation: BTreeMap<String, usize> =
                sizes.keys().zip(alloc).map(|(k, n)| (k.to_string(), n)).collect();
            baseline = stratified_sample(ids, &strata, &allocation, a.seed)?;
            extra.push((column, strata));
        }
        SampleMethod::Mus => {
            let column = cfg.dataset.amount_column.clone().ok_or_else(|| {
                AppError::Core(vqaudit_core::Error::InvalidArgument(
                    "monetary-unit sampling needs dataset.amount_column".into(),
                ))
            })?;
            baseline = mus_sample(ids, data.amounts(), require_n(a)?, a.seed)?;
            extra.push((column.clone(), prep.column(&column)));
        }
    }
    ctx.manifest.seeds.push(a.seed);
    let extra_refs: Vec<(&str, &[String])> = extra.iter().map(|(n, v)| (n.as_str(), v.as_slice())).collect();
    export::write_baseline(&ctx.output("baseline.csv"), &baseline, &extra_refs)?;
    write_json(&ctx.output("baseline.json"), &baseline)?;
    println!("{:?} sample: {} records of {}", baseline.method(), baseline.len(), ids.len());
    Ok(())
}

fn read_amount_columns(path: &Path, columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| AppError::format(path, e))?;
    let headers = reader.headers().map_err(|e| AppError::format(path, e))?.clone();
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h.trim() == *c)
                .ok_or_else(|| AppError::format(path, format!("missing column '{c}'")))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::new(); columns.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| AppError::format(path, e))?;
        for (col, &i) in idx.iter().enumerate() {
            let raw = record.get(i).unwrap_or("");
            let v = parse_number(raw)
                .ok_or_else(|| AppError::format(path, format!("row {}: '{raw}' is not a number", line + 1)))?;
            out[col].push(v);
        }
    }
    Ok(out)
}

fn estimate(ctx: &mut Ctx, a: &EstimateArgs) -> Result<()> {
    let mut population_size = a.population_size;
    let mut population_total = a.population_total;
    if let Some(config) = &a.config {
        let (_, prep) = load(ctx, config)?;
        population_size.get_or_insert(prep.dataset.len());
        if population_total.is_none() {
            let amounts = prep.dataset.amounts();
            if amounts.iter().any(Option::is_some) {
                population_total = Some(amounts.iter().flatten().sum());
            }
        }
    }
    let need_size = || {
        population_size.ok_or_else(|| AppError::Usage("--population-size (or --config) is required".into()))
    };
    let need_total = || {
        population_total.ok_or_else(|| AppError::Usage("--population-total (or --config with amounts) is required".into()))
    };
    let report = match a.method {
        EstimateKind::Mpu => {
            let cols = read_amount_columns(&a.input, &[&a.audited_column])?;
            mpu_estimate(&cols[0], need_size()?)?
        }
        EstimateKind::Difference | EstimateKind::Ratio => {
            let cols = read_amount_columns(&a.input, &[&a.recorded_column, &a.audited_column])?;
            let pairs: Vec<AmountPair> = cols[0]
                .iter()
                .zip(&cols[1])
                .map(|(&recorded, &audited)| AmountPair { recorded, audited })
                .collect();
            if a.method == EstimateKind::Difference {
                difference_estimate(&pairs, need_size()?, need_total()?)?
            } else {
                ratio_estimate(&pairs, need_total()?)?
            }
        }
    };
    if ctx.manifest.config.is_null() {
        ctx.manifest.config = serde_json::json!({
            "population_size": population_size,
            "population_total": population_total,
        });
    }
    write_json(&ctx.output("estimate.json"), &report)?;
    println!("{:?} estimate of the audited total: {}", report.method, report.estimate);
    Ok(())
}

fn metrics(ctx: &mut Ctx, a: &MetricsArgs) -> Result<()> {
    let (cfg, prep) = load(ctx, &a.config)?;
    let factors = a.factors.clone().unwrap_or_else(|| cfg.metrics.factors.clone());
    if factors.is_empty() {
        return Err(AppError::Usage("no factors given (--factors or metrics.factors)".into()));
    }
    let cks = a
        .checkpoint
        .iter()
        .map(|p| load_checkpoint(p, &prep))
        .collect::<Result<Vec<_>>>()?;
    let models: Vec<(u64, &vqaudit_core::vqvae::VqVae)> = cks.iter().map(|c| (c.seed, &c.model)).collect();
    ctx.manifest.seeds = models.iter().map(|(s, _)| *s).collect();
    let report = run_all_metrics(&models, &prep.dataset, &factors, &cfg.metrics.protocol)?;
    for s in &report.seeds {
        for w in &s.warnings {
            eprintln!("warning (seed {}): {w}", s.seed);
        }
        for f in &s.failures {
            eprintln!("metric {} failed (seed {}): {}", f.metric, s.seed, f.message);
        }
    }
    let k = cks[0].model.codebook_size();
    write_json(&ctx.output("disentanglement.json"), &report)?;
    export::write_disentanglement(&ctx.output("disentanglement.csv"), &dataset_name(&a.config), k, &report)?;
    let show = |m: Option<vqaudit_core::stats::MeanStd>| m.map(|m| m.to_string()).unwrap_or_else(|| "n/a".into());
    println!(
        "beta-VAE {}  FactorVAE {}  MIG {}  DCI {}",
        show(report.beta_vae),
        show(report.factor_vae),
        show(report.mig),
        show(report.dci)
    );
    Ok(())
}

fn export_latent(ctx: &mut Ctx, a: &CheckpointArgs) -> Result<()> {
    let (cfg, prep) = load(ctx, &a.config)?;
    let ck = load_checkpoint(&a.checkpoint, &prep)?;
    ctx.manifest.seeds.push(ck.seed);
    let assignment = ck.model.assign_dataset(&prep.dataset)?;
    let counts = assignment_counts(&assignment.indices, ck.model.codebook_size())?;
    let labels = prep.labels(&cfg.dataset);
    export::write_latents(&ctx.output("latent.csv"), prep.dataset.row_ids(), &assignment, labels.as_deref())?;
    export::write_codebook(&ctx.output("codebook.csv"), ck.model.codebook(), &counts)?;
    println!("exported {} latents and {} embeddings", prep.dataset.len(), counts.len());
    Ok(())
}

fn synth(ctx: &mut Ctx, a: &SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        processes: a.processes,
        attributes: a.attributes,
        values_per_attribute: a.values,
        noise: a.noise,
        rows: a.rows,
        seed: a.seed,
    };
    let data = synthetic::generate(&spec)?;
    let names: Vec<String> = data.table.columns.iter().map(|c| c.name.clone()).collect();
    write_csv(&ctx.output("synthetic.csv"), |w| {
        let mut header = vec!["row_id".to_string()];
        header.extend(names.iter().cloned());
        w.write_record(&header)?;
        for e in &data.table.entries {
            let mut row = vec![e.row_id.clone()];
            row.extend(names.iter().map(|n| e.get(n).unwrap_or("").to_string()));
            w.write_record(&row)?;
        }
        Ok(())
    })?;
    let attributes: Vec<String> = data.attribute_columns().into_iter().map(|c| c.name).collect();
    let config = serde_json::json!({
        "dataset": {
            "csv_path": "synthetic.csv",
            "id_column": "row_id",
            "amount_column": synthetic::AMOUNT_COLUMN,
            "label_column": synthetic::LABEL_COLUMN,
            "attributes": attributes,
            "numeric_attributes": [],
        },
        "train": { "codebook_size": 8, "max_epochs": 500 },
        "metrics": { "factors": [synthetic::attribute_name(0), synthetic::attribute_name(1)] },
    });
    write_json(&ctx.output("synthetic.json"), &config)?;
    ctx.manifest.seeds.push(a.seed);
    ctx.manifest.config = snapshot(&serde_json::json!({
        "rows": a.rows, "seed": a.seed, "processes": a.processes,
        "attributes": a.attributes, "values": a.values, "noise": a.noise,
    }));
    println!(
        "wrote {} rows from {} processes to {}",
        a.rows,
        a.processes,
        ctx.out.join("synthetic.csv").display()
    );
    Ok(())
}
