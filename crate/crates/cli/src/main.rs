use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use driveaware::embed::{EmbeddingProvider, FileEmbedder, EMBEDDING_DIM};
use driveaware::eval::{
    self, assemble_flat_features, assemble_hazard_sequences, fit_flat, fit_trend, modality_blocks, train_fingerprint,
    EmbedderSpec, EvalConfig, EvalResults, Extractor, Modality, Pipeline, PipelineInfo,
};
use driveaware::face::catalog::{catalog_json, catalog_markdown};
use driveaware::info::PairMeasure;
use driveaware::session::synth::{synth_dataset, SignalMode, SynthConfig, SEPARATION_HIGH, SEPARATION_MID};
use driveaware::session::{load_session, Dataset, SessionManifest, Task};

#[derive(Parser)]
#[command(name = "driveaware", version, about = "Driver attention and hazard detection from EEG and facial landmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic session (files plus manifest.json).
    Synth(SynthArgs),
    /// Extract per-trial feature vectors (or per-interval sequences) to JSON.
    Extract(ExtractArgs),
    /// Render the scalp topomap of one trial to PNG.
    Topomap(TopomapArgs),
    /// Fit the configured pipeline on every trial of the task and save it.
    Train(TrainArgs),
    /// Leave-one-subject-out evaluation; writes a results file and chart.
    Evaluate(EvaluateArgs),
    /// Summarize one or more results files as markdown and charts.
    Report(ReportArgs),
    /// Print the face-geometry catalog.
    Catalog(CatalogArgs),
    /// Write every image the pipeline embeds, for an external embedding tool.
    ExportImages(ExportArgs),
    /// Build an embedding file from JSON lines written by an external tool.
    ImportEmbeddings(ImportArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// JSON file with synthesis settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    subjects: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// attention or hazard.
    #[arg(long)]
    task: Option<Task>,
    /// Class separation: a number, or `high`, `mid`, `none`.
    #[arg(long)]
    separation: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// static or drift.
    #[arg(long)]
    signal: Option<SignalMode>,
    /// Fixed trial duration in seconds.
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct EvalArgs {
    /// JSON file with pipeline settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<Task>,
    /// eeg, face or fused.
    #[arg(long)]
    modality: Option<Modality>,
    /// flat or trend.
    #[arg(long)]
    pipeline: Option<Pipeline>,
    #[arg(long)]
    low_hz: Option<f64>,
    #[arg(long)]
    high_hz: Option<f64>,
    #[arg(long)]
    filter_order: Option<usize>,
    #[arg(long)]
    z_thresh: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    /// conditional_entropy or mutual_information.
    #[arg(long)]
    pair_measure: Option<String>,
    /// Seed of the built-in pseudo embedder.
    #[arg(long, conflicts_with = "embeddings")]
    embedder_seed: Option<u64>,
    /// Embedding file to use instead of the built-in embedder.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// PCA components of the flat pipeline.
    #[arg(long)]
    pca: Option<usize>,
    #[arg(long)]
    elm_hidden: Option<usize>,
    #[arg(long)]
    elm_ridge: Option<f64>,
    #[arg(long)]
    elm_seed: Option<u64>,
    /// Interval length of the trend pipeline, seconds.
    #[arg(long)]
    interval: Option<f64>,
    /// PCA components of the trend pipeline.
    #[arg(long)]
    trend_pca: Option<usize>,
    /// LSTM layer sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    lstm_hidden: Option<Vec<usize>>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    clip: Option<f64>,
    #[arg(long)]
    lstm_seed: Option<u64>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    eval: EvalArgs,
    /// Output JSON file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TopomapArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    trial: String,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    eval: EvalArgs,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    eval: EvalArgs,
    /// Output results JSON file.
    #[arg(long)]
    out: PathBuf,
    /// Per-subject accuracy chart; defaults to the results path with `.png`.
    #[arg(long)]
    chart: Option<PathBuf>,
    /// Print the canonical configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Results files written by `evaluate`.
    #[arg(required = true)]
    results: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CatalogArgs {
    /// md or json.
    #[arg(long, default_value = "md")]
    format: String,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ImportArgs {
    /// JSON lines, one `{"key": ..., "vector": [...]}` object per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    provider_id: String,
    #[arg(long, default_value = "")]
    metadata: String,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::Topomap(a) => topomap(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Report(a) => report(a),
        Command::Catalog(a) => catalog(a),
        Command::ExportImages(a) => export_images(a),
        Command::ImportEmbeddings(a) => import_embeddings(a),
    }
}

fn parse_separation(s: &str) -> Result<f64> {
    match s {
        "high" => Ok(SEPARATION_HIGH),
        "mid" => Ok(SEPARATION_MID),
        "none" => Ok(0.0),
        _ => s.parse().map_err(|_| anyhow!("separation must be a number, high, mid or none; got {s:?}")),
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => SynthConfig::default(),
    };
    if let Some(v) = a.subjects {
        cfg.n_subjects = v;
    }
    if let Some(v) = a.trials {
        cfg.trials_per_subject = v;
    }
    if let Some(v) = a.task {
        cfg.task = v;
    }
    if let Some(v) = &a.separation {
        cfg.class_separation = parse_separation(v)?;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.signal {
        cfg.signal = v;
    }
    if a.duration.is_some() {
        cfg.duration_s = a.duration;
    }
    let manifest = synth_dataset(&cfg, &a.out)?;
    std::fs::write(a.out.join("synth_config.json"), serde_json::to_string_pretty(&cfg)? + "\n")?;
    println!(
        "wrote {} trials for {} subjects to {}",
        manifest.trials.len(),
        manifest.subjects.len(),
        a.out.display()
    );
    Ok(())
}

impl EvalArgs {
    fn config(&self) -> Result<EvalConfig> {
        let mut c = match &self.config {
            Some(p) => EvalConfig::load(p)?,
            None => EvalConfig::default(),
        };
        macro_rules! set {
            ($field:expr, $v:expr) => {
                if let Some(v) = $v.clone() {
                    $field = v;
                }
            };
        }
        set!(c.task, self.task);
        set!(c.modality, self.modality);
        set!(c.pipeline, self.pipeline);
        set!(c.filter.low_hz, self.low_hz);
        set!(c.filter.high_hz, self.high_hz);
        set!(c.filter.order, self.filter_order);
        set!(c.z_thresh, self.z_thresh);
        set!(c.discretization.n_bins, self.bins);
        if let Some(m) = &self.pair_measure {
            c.pair_measure = serde_json::from_value::<PairMeasure>(json!(m))
                .map_err(|_| anyhow!("pair measure must be conditional_entropy or mutual_information"))?;
        }
        if let Some(seed) = self.embedder_seed {
            c.embedder = EmbedderSpec::Pseudo { seed };
        }
        if let Some(path) = &self.embeddings {
            c.embedder = EmbedderSpec::File { path: path.clone() };
        }
        set!(c.pca_components, self.pca);
        set!(c.elm.hidden, self.elm_hidden);
        set!(c.elm.ridge, self.elm_ridge);
        set!(c.elm.seed, self.elm_seed);
        set!(c.trend.interval_s, self.interval);
        set!(c.trend.pca_components, self.trend_pca);
        set!(c.trend.hidden, self.lstm_hidden);
        set!(c.trend.sgdm.epochs, self.epochs);
        set!(c.trend.sgdm.learning_rate, self.lr);
        set!(c.trend.sgdm.momentum, self.momentum);
        set!(c.trend.sgdm.batch_size, self.batch);
        set!(c.trend.sgdm.clip_norm, self.clip);
        set!(c.trend.sgdm.seed, self.lstm_seed);
        c.validate()?;
        log::info!("config fingerprint {}", c.fingerprint());
        Ok(c)
    }
}

fn load(manifest: &Path) -> Result<(SessionManifest, Dataset)> {
    load_session(manifest).with_context(|| format!("loading {}", manifest.display()))
}

fn write_json(path: &Path, v: &serde_json::Value) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(v)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn extract(a: ExtractArgs) -> Result<()> {
    let cfg = a.eval.config()?;
    let (_, ds) = load(&a.manifest)?;
    let ex = Extractor::new(&cfg)?;
    let out = match cfg.pipeline {
        Pipeline::Flat => {
            let set = assemble_flat_features(&ds, cfg.task, cfg.modality, &ex);
            println!("{} vectors, {} excluded", set.vectors.len(), set.excluded.len());
            json!({
                "config_fingerprint": cfg.fingerprint(),
                "config": cfg,
                "vectors": set.vectors,
                "excluded": set.excluded,
            })
        }
        Pipeline::Trend => {
            let set = assemble_hazard_sequences(&ds, cfg.modality, cfg.trend.interval_s, &ex)?;
            println!("{} sequences, {} excluded", set.sequences.len(), set.excluded.len());
            let seqs: Vec<_> = set
                .sequences
                .iter()
                .map(|s| json!({"trial_id": s.trial_id, "subject_id": s.subject_id, "label": s.label, "steps": s.steps}))
                .collect();
            json!({
                "config_fingerprint": cfg.fingerprint(),
                "config": cfg,
                "interval_s": set.interval_s,
                "sequences": seqs,
                "excluded": set.excluded,
            })
        }
    };
    write_json(&a.out, &out)
}

fn topomap(a: TopomapArgs) -> Result<()> {
    let cfg = a.eval.config()?;
    let (_, ds) = load(&a.manifest)?;
    let trial = ds
        .trials
        .iter()
        .find(|t| t.entry.trial_id == a.trial)
        .ok_or_else(|| anyhow!("trial {} is not in the manifest", a.trial))?;
    let ex = Extractor::with_provider(&cfg, Arc::new(driveaware::embed::PseudoEmbedder::new(0)))?;
    ex.trial_topomap(trial)?.write_png(&a.out)?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let cfg = a.eval.config()?;
    let (_, ds) = load(&a.manifest)?;
    let ex = Extractor::new(&cfg)?;
    let blocks = modality_blocks(cfg.modality);
    match cfg.pipeline {
        Pipeline::Flat => {
            let set = assemble_flat_features(&ds, cfg.task, cfg.modality, &ex);
            let rows: Vec<Vec<f64>> = set.vectors.iter().map(|v| v.values.clone()).collect();
            let labels: Vec<u8> = set.vectors.iter().map(|v| v.label).collect();
            let ids: Vec<&str> = set.vectors.iter().map(|v| v.trial_id.as_str()).collect();
            let fit = fit_flat(&rows, &labels, cfg.pca_components, &cfg.elm, &blocks)?;
            let correct = rows
                .iter()
                .zip(&labels)
                .map(|(r, &y)| fit.predict(r).map(|p| (p == y) as usize))
                .sum::<driveaware::Result<usize>>()?;
            let info = info_for(&cfg, &ids);
            eval::save_flat_fit(&fit, &info, &a.out)?;
            println!(
                "trained on {} trials ({} excluded); training accuracy {:.2}%",
                rows.len(),
                set.excluded.len(),
                100.0 * correct as f64 / rows.len().max(1) as f64
            );
        }
        Pipeline::Trend => {
            let set = assemble_hazard_sequences(&ds, cfg.modality, cfg.trend.interval_s, &ex)?;
            let seqs: Vec<&[Vec<f64>]> = set.sequences.iter().map(|s| s.steps.as_slice()).collect();
            let labels: Vec<u8> = set.sequences.iter().map(|s| s.label).collect();
            let ids: Vec<&str> = set.sequences.iter().map(|s| s.trial_id.as_str()).collect();
            let fit = fit_trend(
                &seqs,
                &labels,
                cfg.trend.pca_components,
                &cfg.trend.hidden,
                &cfg.trend.sgdm,
                &blocks,
            )?;
            let correct = set
                .sequences
                .iter()
                .map(|s| fit.predict(&s.steps).map(|p| (p == s.label) as usize))
                .sum::<driveaware::Result<usize>>()?;
            eval::save_trend_fit(&fit, &info_for(&cfg, &ids), &a.out)?;
            println!(
                "trained on {} sequences ({} excluded); training accuracy {:.2}%",
                seqs.len(),
                set.excluded.len(),
                100.0 * correct as f64 / seqs.len().max(1) as f64
            );
        }
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

fn info_for(cfg: &EvalConfig, ids: &[&str]) -> PipelineInfo {
    PipelineInfo {
        task: cfg.task,
        modality: cfg.modality,
        pipeline: cfg.pipeline,
        config_fingerprint: cfg.fingerprint(),
        train_fingerprint: train_fingerprint(ids),
    }
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let cfg = a.eval.config()?;
    if a.print_config {
        println!("{}", cfg.canonical_json());
        return Ok(());
    }
    let (manifest, ds) = load(&a.manifest)?;
    let ex = Extractor::new(&cfg)?;
    let results = eval::evaluate(&ds, &cfg, &ex, manifest.dataset_seed)?;
    results.write(&a.out)?;
    let chart = a.chart.unwrap_or_else(|| a.out.with_extension("png"));
    eval::accuracy_chart(&results.report).write_png(&chart)?;
    println!(
        "{}: mean accuracy {:.2}% over {} subjects ({} trials, {} excluded); config {}",
        results.label(),
        results.report.mean_accuracy,
        results.report.n_subjects,
        results.report.n_trials,
        results.report.excluded.len(),
        &results.config_fingerprint[..12]
    );
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    std::fs::create_dir_all(&a.out_dir)?;
    let results = a
        .results
        .iter()
        .map(|p| EvalResults::load(p).map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    let mut used = BTreeSet::new();
    for r in &results {
        let mut name = r.label().replace('/', "_");
        if !used.insert(name.clone()) {
            name = format!("{name}_{}", &r.config_fingerprint[..8]);
            used.insert(name.clone());
        }
        eval::accuracy_chart(&r.report).write_png(&a.out_dir.join(format!("{name}.png")))?;
    }
    let md = eval::markdown_summary(&results);
    std::fs::write(a.out_dir.join("summary.md"), &md)?;
    print!("{md}");
    Ok(())
}

fn catalog(a: CatalogArgs) -> Result<()> {
    match a.format.as_str() {
        "md" => print!("{}", catalog_markdown()),
        "json" => println!("{}", serde_json::to_string_pretty(&catalog_json())?),
        other => bail!("unknown catalog format {other:?}; use md or json"),
    }
    Ok(())
}

fn export_images(a: ExportArgs) -> Result<()> {
    let cfg = a.eval.config()?;
    let (_, ds) = load(&a.manifest)?;
    let ex = Extractor::with_provider(&cfg, Arc::new(driveaware::embed::PseudoEmbedder::new(0)))?;
    let img_dir = a.out_dir.join("images");
    std::fs::create_dir_all(&img_dir)?;
    let index_path = a.out_dir.join("index.jsonl");
    let mut index = std::io::BufWriter::new(std::fs::File::create(&index_path)?);
    let mut n = 0usize;
    for t in &ds.trials {
        let interval = (t.entry.label.task == Task::Hazard).then_some(cfg.trend.interval_s);
        let images = match ex.trial_images(t, interval) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("{}: {e}", t.entry.trial_id);
                continue;
            }
        };
        for (img, key) in images {
            let file = format!("{n:07}.png");
            img.write_png(&img_dir.join(&file))?;
            let line = json!({"key": key, "content_key": img.content_key(), "file": format!("images/{file}")});
            writeln!(index, "{line}")?;
            n += 1;
        }
    }
    index.flush()?;
    println!("wrote {n} images and {}", index_path.display());
    Ok(())
}

fn import_embeddings(a: ImportArgs) -> Result<()> {
    let f = std::fs::File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let mut emb = FileEmbedder::new(a.provider_id, a.metadata);
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value =
            serde_json::from_str(&line).with_context(|| format!("{}:{}", a.input.display(), i + 1))?;
        let key = v["key"]
            .as_str()
            .ok_or_else(|| anyhow!("{}:{}: missing string `key`", a.input.display(), i + 1))?;
        let vector: Vec<f32> = v["vector"]
            .as_array()
            .ok_or_else(|| anyhow!("{}:{}: missing array `vector`", a.input.display(), i + 1))?
            .iter()
            .map(|x| x.as_f64().map(|x| x as f32))
            .collect::<Option<_>>()
            .ok_or_else(|| anyhow!("{}:{}: non-numeric vector entry", a.input.display(), i + 1))?;
        if vector.len() != EMBEDDING_DIM {
            bail!("{}:{}: vector has {} entries, expected {EMBEDDING_DIM}", a.input.display(), i + 1, vector.len());
        }
        emb.insert(key, vector)?;
    }
    emb.save(&a.out)?;
    println!("wrote {} embeddings from {} to {}", emb.len(), emb.provider_id(), a.out.display());
    Ok(())
}
