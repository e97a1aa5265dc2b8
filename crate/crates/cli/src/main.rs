//! `lcp`: data generation, episode sampling, few-shot evaluation, probe
//! training and benchmarking over embedding stores.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.

mod commands;
mod scores;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lcp_core::evaluation::FeatureContext;

/// Worker threads for parallel runs; unset means one per core.
const THREADS_ENV: &str = "LCP_THREADS";

#[derive(Parser, Debug)]
#[command(name = "lcp", version, about = "Multi-label few-shot classification with label-combination prototypes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic vocabulary, manifest and embedding store.
    Generate(GenerateArgs),
    /// Draw one N-way K-shot episode and print its composition.
    Sample(SampleArgs),
    /// Seeded few-shot runs with mean and std of macro/micro-F1.
    FslEval(FslEvalArgs),
    /// Train a probe head on the train split, early-stopping on valid.
    ProbeTrain(ProbeTrainArgs),
    /// Replace every embedding with the probe's hidden-layer features.
    ProbeFeatures(ProbeFeaturesArgs),
    /// Time the original and deduplicated classifiers across label counts.
    Bench(BenchArgs),
    /// Score predictions (F1) or per-label scores (ROC-AUC, mAP).
    Metrics(MetricsArgs),
}

#[derive(Args, Debug, Clone)]
struct DatasetArgs {
    /// Vocabulary file, one label per line.
    #[arg(long)]
    vocab: PathBuf,
    /// Manifest, one JSON record per line.
    #[arg(long)]
    manifest: PathBuf,
    /// Embedding store (.lcpe).
    #[arg(long)]
    store: PathBuf,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 20)]
    labels: usize,
    #[arg(long, default_value_t = 200)]
    items_per_split: usize,
    /// Poisson rate of labels per item.
    #[arg(long, default_value_t = 3.0)]
    mean_labels: f64,
    #[arg(long, default_value_t = 8)]
    max_labels_per_item: usize,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    centroid_scale: f64,
    /// Per-coordinate noise standard deviation.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Carriers each label needs in every split.
    #[arg(long, default_value_t = 3)]
    min_carriers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Labels per episode; defaults to the whole vocabulary.
    #[arg(long)]
    n_way: Option<usize>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the record here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FslEvalArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// pt: raw store; prob: probe hidden features, computed from --probe or
    /// already in the store (see probe-features); sft: an externally
    /// fine-tuned store, used as given.
    #[arg(long, default_value = "pt", value_parser = parse_context)]
    context: FeatureContext,
    /// Probe parameters applied to the store before evaluation.
    #[arg(long)]
    probe: Option<PathBuf>,
    #[arg(long)]
    n_way: Option<usize>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Explicit episode seeds; overrides --runs.
    #[arg(long, value_delimiter = ',', conflicts_with = "master_seed")]
    seeds: Option<Vec<u64>>,
    /// Derive --runs seeds from this one instead of using 0..runs.
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long, default_value_t = lcp_core::DEFAULT_MAX_LABELS_PER_ITEM)]
    max_labels_per_item: usize,
    /// Write the run record as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write per-run rows plus mean and std as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProbeTrainArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Parameter file to write (.lcpp).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 512)]
    hidden: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
    #[arg(long, default_value_t = 10)]
    patience: usize,
    #[arg(long, default_value_t = 200)]
    max_epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write test-split scores as CSV for `lcp metrics --scores`.
    #[arg(long)]
    scores: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProbeFeaturesArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    probe: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "20,30,40,50,60")]
    labels: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    episodes: usize,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    warmup: usize,
    #[arg(long, default_value_t = 400)]
    items_per_split: usize,
    #[arg(long, default_value_t = 3.0)]
    mean_labels: f64,
    #[arg(long, default_value_t = 12)]
    max_labels_per_item: usize,
    #[arg(long, default_value_t = 128)]
    dim: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output; written only if every timed query agreed.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    #[arg(long)]
    vocab: PathBuf,
    /// Ground truth.
    #[arg(long)]
    manifest: PathBuf,
    /// JSON lines of {"id", "labels"}: predicted label sets, scored by F1.
    #[arg(long, required_unless_present = "scores")]
    predictions: Option<PathBuf>,
    /// CSV with header `id,<label>...`: scores for ROC-AUC and mAP.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Write the metric records as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_context(s: &str) -> Result<FeatureContext, String> {
    s.parse()
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Sample(a) => commands::sample(a),
        Command::FslEval(a) => commands::fsl_eval(a),
        Command::ProbeTrain(a) => commands::probe_train(a),
        Command::ProbeFeatures(a) => commands::probe_features(a),
        Command::Bench(a) => commands::bench(a),
        Command::Metrics(a) => commands::metrics(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<commands::UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
