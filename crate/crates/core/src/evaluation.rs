//! Few-shot evaluation runs across feature contexts.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{build_prototype_index, classify, EngineError, Prediction};
use crate::io::{EmbeddingStore, FormatError};
use crate::metrics::{f1_scores, F1Report, MetricsError};
use crate::model::{EmbeddingVector, Episode};
use crate::probe::{extract_probe_features, ProbeDataset, ProbeError, ProbeParams};
use crate::sampler::{sample_episode, DatasetManifest, SampleError, SamplerConfig, Split};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("query {0} has no ground truth")]
    MissingTruth(String),
    #[error("split {0} has no items")]
    EmptySplit(Split),
    #[error("no seeds given")]
    NoSeeds,
}

/// Which representation the embeddings come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureContext {
    /// Raw foundation-model output.
    #[serde(rename = "pt")]
    Pretrained,
    /// Hidden layer of a trained probe.
    #[serde(rename = "prob")]
    Probe,
    /// A store produced by an external fine-tuning run.
    #[serde(rename = "sft")]
    FineTuned,
}

impl FeatureContext {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureContext::Pretrained => "pt",
            FeatureContext::Probe => "prob",
            FeatureContext::FineTuned => "sft",
        }
    }
}

impl fmt::Display for FeatureContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureContext {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pt" => Ok(FeatureContext::Pretrained),
            "prob" => Ok(FeatureContext::Probe),
            "sft" => Ok(FeatureContext::FineTuned),
            other => Err(format!("unknown feature context {other:?} (pt, prob, sft)")),
        }
    }
}

/// Replaces every vector of `store` with its probe hidden-layer features.
pub fn probe_feature_store(
    store: &EmbeddingStore,
    params: &ProbeParams,
) -> Result<EmbeddingStore, EvalError> {
    let features: Vec<(String, Vec<f64>)> = store
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(id, e)| Ok(((*id).to_owned(), extract_probe_features(e, params)?)))
        .collect::<Result<_, ProbeError>>()?;
    let mut out = EmbeddingStore::new(params.hidden_dim());
    for (id, f) in features {
        let v = EmbeddingVector::from_f64(&f)
            .map_err(|_| FormatError::NonFiniteValue(id.clone()))?;
        out.insert(id, v)?;
    }
    Ok(out)
}

/// Probe training data for one split: every item with its full label set.
pub fn probe_dataset(
    manifest: &DatasetManifest,
    store: &EmbeddingStore,
    split: Split,
) -> Result<ProbeDataset, EvalError> {
    let rows = manifest
        .split(split)
        .map(|item| {
            store
                .get(&item.id)
                .map(|e| (e, &item.labels))
                .ok_or_else(|| SampleError::MissingEmbedding(item.id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if rows.is_empty() {
        return Err(EvalError::EmptySplit(split));
    }
    Ok(ProbeDataset::from_items(rows, manifest.vocabulary().len())?)
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub predictions: Vec<Prediction>,
    pub f1: F1Report,
    /// `|L|`
    pub classes: usize,
    /// `M`
    pub prototypes: usize,
}

/// Builds the deduplicated index and classifies every query.
pub fn evaluate_episode(episode: &Episode, max_labels_per_item: usize) -> Result<EpisodeResult, EvalError> {
    let index = build_prototype_index(&episode.support, max_labels_per_item)?;
    let predictions = episode
        .queries
        .par_iter()
        .map(|q| classify(q, &index))
        .collect::<Result<Vec<_>, _>>()?;
    let pairs = episode
        .queries
        .iter()
        .zip(&predictions)
        .map(|(q, p)| {
            q.truth
                .map(|t| (p.labels, t))
                .ok_or_else(|| EvalError::MissingTruth(q.id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let f1 = f1_scores(&pairs, episode.vocabulary.len())?;
    Ok(EpisodeResult {
        predictions,
        f1,
        classes: index.total_classes(),
        prototypes: index.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FslConfig {
    /// Labels per episode; `None` takes the whole vocabulary.
    pub n_way: Option<usize>,
    pub k_shot: usize,
    pub max_labels_per_item: usize,
}

impl Default for FslConfig {
    fn default() -> Self {
        Self {
            n_way: None,
            k_shot: SamplerConfig::DEFAULT_K_SHOT,
            max_labels_per_item: crate::engine::DEFAULT_MAX_LABELS_PER_ITEM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub classes: usize,
    pub prototypes: usize,
    pub support: usize,
    pub queries: usize,
}

/// One seeded episode, sampled and evaluated.
pub fn run_once(
    manifest: &DatasetManifest,
    store: &EmbeddingStore,
    config: &FslConfig,
    seed: u64,
) -> Result<RunMetrics, EvalError> {
    let n_way = config.n_way.unwrap_or(manifest.vocabulary().len());
    let sampler = SamplerConfig::new(n_way).with_k_shot(config.k_shot).with_seed(seed);
    let episode = sample_episode(manifest, store, &sampler)?;
    let result = evaluate_episode(&episode, config.max_labels_per_item)?;
    Ok(RunMetrics {
        seed,
        macro_f1: result.f1.macro_f1,
        micro_f1: result.f1.micro_f1,
        classes: result.classes,
        prototypes: result.prototypes,
        support: episode.support.len(),
        queries: episode.queries.len(),
    })
}

/// `runs` episode seeds derived from one master seed.
pub fn derive_seeds(master: u64, runs: usize) -> Vec<u64> {
    (0..runs as u64).map(|i| crate::rng::derive(master, i)).collect()
}

/// Runs every seed in parallel; results come back in seed-list order.
pub fn run_fsl(
    manifest: &DatasetManifest,
    store: &EmbeddingStore,
    config: &FslConfig,
    seeds: &[u64],
) -> Result<Vec<RunMetrics>, EvalError> {
    if seeds.is_empty() {
        return Err(EvalError::NoSeeds);
    }
    seeds
        .par_iter()
        .map(|&seed| run_once(manifest, store, config, seed))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub macro_f1: MeanStd,
    pub micro_f1: MeanStd,
}

impl Aggregate {
    pub fn of(runs: &[RunMetrics]) -> Self {
        let macros: Vec<f64> = runs.iter().map(|r| r.macro_f1).collect();
        let micros: Vec<f64> = runs.iter().map(|r| r.micro_f1).collect();
        Self {
            macro_f1: MeanStd::of(&macros),
            micro_f1: MeanStd::of(&micros),
        }
    }
}

/// Everything needed to audit and reproduce an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub context: FeatureContext,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunMetrics>,
    pub aggregate: Aggregate,
}

impl RunRecord {
    pub fn new(
        command: impl Into<String>,
        context: FeatureContext,
        config: serde_json::Value,
        runs: Vec<RunMetrics>,
    ) -> Self {
        Self {
            command: command.into(),
            context,
            config,
            seeds: runs.iter().map(|r| r.seed).collect(),
            aggregate: Aggregate::of(&runs),
            runs,
        }
    }

    /// True when the stored aggregate matches the per-run values.
    pub fn is_consistent(&self) -> bool {
        let seeds: Vec<u64> = self.runs.iter().map(|r| r.seed).collect();
        let again = Aggregate::of(&self.runs);
        let close = |a: MeanStd, b: MeanStd| (a.mean - b.mean).abs() <= 1e-12 && (a.std - b.std).abs() <= 1e-12;
        seeds == self.seeds
            && close(again.macro_f1, self.aggregate.macro_f1)
            && close(again.micro_f1, self.aggregate.micro_f1)
    }

    /// One row per run, then `mean` and `std` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,macro_f1,micro_f1,classes,prototypes,support,queries\n");
        for r in &self.runs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.seed, r.macro_f1, r.micro_f1, r.classes, r.prototypes, r.support, r.queries
            ));
        }
        let a = &self.aggregate;
        out.push_str(&format!("mean,{},{},,,,\n", a.macro_f1.mean, a.micro_f1.mean));
        out.push_str(&format!("std,{},{},,,,\n", a.macro_f1.std, a.micro_f1.std));
        out
    }
}
