use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lcp_core::evaluation::{
    derive_seeds, probe_dataset, probe_feature_store, run_fsl, FeatureContext, FslConfig, RunRecord,
};
use lcp_core::io::{
    generate_synthetic, read_manifest, read_params, read_store, read_vocabulary, write_manifest,
    write_params, write_store, write_vocabulary, EmbeddingStore, SyntheticSpec,
};
use lcp_core::metrics::{f1_scores, mean_average_precision, roc_auc, MetricRecord};
use lcp_core::probe::{probe_scores, train_probe, TrainConfig};
use lcp_core::sampler::{episode_record, sample_episode, DatasetManifest, SamplerConfig, Split};
use lcp_core::scalability::{bench_table_to_string, run_benchmark_with_progress, BenchConfig};
use serde_json::json;

use crate::scores::{read_predictions, read_scores, scores_to_csv};
use crate::{
    BenchArgs, DatasetArgs, FslEvalArgs, GenerateArgs, MetricsArgs, ProbeFeaturesArgs,
    ProbeTrainArgs, SampleArgs,
};

pub const VOCAB_FILE: &str = "vocab.txt";
pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const STORE_FILE: &str = "embeddings.lcpe";

/// A bad flag combination that clap cannot express; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn load(data: &DatasetArgs) -> Result<(DatasetManifest, EmbeddingStore)> {
    let vocab = read_vocabulary(&data.vocab).with_context(|| format!("reading {}", data.vocab.display()))?;
    let manifest = read_manifest(&data.manifest, vocab)
        .with_context(|| format!("reading {}", data.manifest.display()))?;
    let store = read_store(&data.store).with_context(|| format!("reading {}", data.store.display()))?;
    Ok((manifest, store))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    let spec = SyntheticSpec {
        num_labels: a.labels,
        items_per_split: a.items_per_split,
        mean_labels: a.mean_labels,
        max_labels_per_item: a.max_labels_per_item,
        dim: a.dim,
        centroid_scale: a.centroid_scale,
        noise_scale: a.noise,
        min_carriers: a.min_carriers,
        seed: a.seed,
        ..SyntheticSpec::default()
    };
    let data = generate_synthetic(&spec)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_vocabulary(data.manifest.vocabulary(), a.out.join(VOCAB_FILE))?;
    write_manifest(&data.manifest, a.out.join(MANIFEST_FILE))?;
    write_store(&data.store, a.out.join(STORE_FILE))?;
    println!(
        "wrote {} items, {} labels, dim {} to {}",
        data.manifest.items().len(),
        spec.num_labels,
        spec.dim,
        a.out.display()
    );
    Ok(())
}

pub fn sample(a: SampleArgs) -> Result<()> {
    let (manifest, store) = load(&a.data)?;
    let n_way = a.n_way.unwrap_or(manifest.vocabulary().len());
    let config = SamplerConfig::new(n_way).with_k_shot(a.k).with_seed(a.seed);
    let episode = sample_episode(&manifest, &store, &config)?;
    let record = episode_record(&episode, a.seed);
    match a.out {
        Some(path) => write_text(&path, &record),
        None => {
            print!("{record}");
            Ok(())
        }
    }
}

fn seeds_for(a: &FslEvalArgs) -> Result<Vec<u64>> {
    if a.runs == 0 {
        return Err(UsageError("--runs must be at least 1".into()).into());
    }
    Ok(match (&a.seeds, a.master_seed) {
        (Some(seeds), _) => seeds.clone(),
        (None, Some(master)) => derive_seeds(master, a.runs),
        (None, None) => (0..a.runs as u64).collect(),
    })
}

fn run_table(record: &RunRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<22} {:>9} {:>9} {:>7} {:>5}", "seed", "macro_f1", "micro_f1", "|L|", "M");
    for r in &record.runs {
        let _ = writeln!(
            out,
            "{:<22} {:>9.4} {:>9.4} {:>7} {:>5}",
            r.seed, r.macro_f1, r.micro_f1, r.classes, r.prototypes
        );
    }
    let agg = &record.aggregate;
    let _ = writeln!(out, "{:<22} {:>9.4} {:>9.4}", "mean", agg.macro_f1.mean, agg.micro_f1.mean);
    let _ = writeln!(out, "{:<22} {:>9.4} {:>9.4}", "std", agg.macro_f1.std, agg.micro_f1.std);
    out
}

pub fn fsl_eval(a: FslEvalArgs) -> Result<()> {
    let seeds = seeds_for(&a)?;
    let (manifest, raw) = load(&a.data)?;
    let store = match (a.context, &a.probe) {
        (FeatureContext::Probe, Some(path)) => {
            let params = read_params(path).with_context(|| format!("reading {}", path.display()))?;
            probe_feature_store(&raw, &params)?
        }
        (_, Some(_)) => return Err(UsageError("--probe only applies to --context prob".into()).into()),
        (_, None) => raw,
    };
    let config = FslConfig {
        n_way: a.n_way,
        k_shot: a.k,
        max_labels_per_item: a.max_labels_per_item,
    };
    let runs = run_fsl(&manifest, &store, &config, &seeds)?;
    let snapshot = json!({
        "vocab": a.data.vocab,
        "manifest": a.data.manifest,
        "store": a.data.store,
        "probe": a.probe,
        "n_way": config.n_way.unwrap_or(manifest.vocabulary().len()),
        "k_shot": config.k_shot,
        "max_labels_per_item": config.max_labels_per_item,
        "master_seed": a.master_seed,
    });
    let record = RunRecord::new("fsl-eval", a.context, snapshot, runs);
    print!("{}", run_table(&record));
    if let Some(path) = &a.json {
        write_text(path, &(serde_json::to_string_pretty(&record)? + "\n"))?;
    }
    if let Some(path) = &a.csv {
        write_text(path, &record.to_csv())?;
    }
    Ok(())
}

pub fn probe_train(a: ProbeTrainArgs) -> Result<()> {
    let (manifest, store) = load(&a.data)?;
    let train = probe_dataset(&manifest, &store, Split::Train)?;
    let valid = probe_dataset(&manifest, &store, Split::Valid)?;
    let config = TrainConfig {
        learning_rate: a.lr,
        batch_size: a.batch_size,
        patience: a.patience,
        max_epochs: a.max_epochs,
        hidden_units: a.hidden,
        seed: a.seed,
        ..TrainConfig::default()
    };
    let run = train_probe(&train, &valid, &config)?;
    write_params(&run.params, &a.out)?;
    let best = &run.history[run.best_epoch - 1];
    println!(
        "epochs {} best {} train_loss {:.6} valid_loss {:.6}",
        run.history.len(),
        run.best_epoch,
        best.train_loss,
        best.valid_loss
    );
    if let Some(path) = &a.scores {
        let test: Vec<_> = manifest.split(Split::Test).collect();
        if test.is_empty() {
            bail!("test split is empty");
        }
        let data = probe_dataset(&manifest, &store, Split::Test)?;
        let scores = probe_scores(data.inputs(), &run.params)?;
        let rows: Vec<Vec<f64>> = scores.rows().into_iter().map(|r| r.to_vec()).collect();
        let ids: Vec<&str> = test.iter().map(|i| i.id.as_str()).collect();
        write_text(path, &scores_to_csv(&ids, manifest.vocabulary().names(), &rows))?;
    }
    Ok(())
}

pub fn probe_features(a: ProbeFeaturesArgs) -> Result<()> {
    let store = read_store(&a.store).with_context(|| format!("reading {}", a.store.display()))?;
    let params = read_params(&a.probe).with_context(|| format!("reading {}", a.probe.display()))?;
    let features = probe_feature_store(&store, &params)?;
    write_store(&features, &a.out)?;
    println!("wrote {} vectors of dim {} to {}", features.len(), features.dim(), a.out.display());
    Ok(())
}

pub fn bench(a: BenchArgs) -> Result<()> {
    let defaults = BenchConfig::default();
    let config = BenchConfig {
        label_counts: a.labels,
        episodes_per_point: a.episodes,
        queries_per_episode: a.queries,
        k_shot: a.k,
        warmup_queries: a.warmup,
        template: SyntheticSpec {
            items_per_split: a.items_per_split,
            mean_labels: a.mean_labels,
            max_labels_per_item: a.max_labels_per_item,
            dim: a.dim,
            noise_scale: a.noise,
            ..defaults.template.clone()
        },
        seed: a.seed,
        ..defaults
    };
    let rows = run_benchmark_with_progress(&config, |line| eprintln!("{line}"))?;
    let table = bench_table_to_string(&rows);
    match a.out {
        Some(path) => {
            write_text(&path, &table)?;
            for r in &rows {
                println!(
                    "labels {:>3}  |L| {:>9.1}  M {:>7.1}  orig {:.4} ms  opt {:.4} ms  speedup {:.2}",
                    r.num_labels, r.classes, r.prototypes, r.t_orig_ms, r.t_opt_ms, r.speedup
                );
            }
        }
        None => print!("{table}"),
    }
    Ok(())
}

pub fn metrics(a: MetricsArgs) -> Result<()> {
    let vocab = read_vocabulary(&a.vocab)?;
    let manifest = read_manifest(&a.manifest, vocab)?;
    let names = manifest.vocabulary().names();
    let mut records = Vec::new();
    if let Some(path) = &a.predictions {
        let pairs = read_predictions(path, &manifest)?;
        let report = f1_scores(&pairs, names.len())?;
        records.extend(MetricRecord::from_f1(&report, names));
    }
    if let Some(path) = &a.scores {
        let matrix = read_scores(path, &manifest)?;
        records.push(MetricRecord::from_ranking("roc_auc", &roc_auc(&matrix)?, names));
        records.push(MetricRecord::from_ranking("map", &mean_average_precision(&matrix)?, names));
    }
    for r in &records {
        println!("{:<10} {:.6}", r.metric, r.value);
        if !r.skipped_labels.is_empty() {
            println!("  skipped: {}", r.skipped_labels.join(","));
        }
    }
    if let Some(path) = &a.json {
        write_text(path, &(serde_json::to_string_pretty(&records)? + "\n"))?;
    }
    Ok(())
}
