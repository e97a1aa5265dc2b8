//! Label-count sweep timing the original and deduplicated classifiers.
//!
//! Each episode draws one synthetic dataset over the largest label count.
//! A sweep point with `n` labels keeps a seeded `n`-label subset of that
//! vocabulary (nested as `n` grows) and projects every item onto it, so
//! larger points see the same items carrying more of their labels.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{
    build_prototype_index, build_prototypes_original, classify, classify_original, EngineError,
};
use crate::io::{generate_synthetic, FormatError, SyntheticDataset, SyntheticSpec};
use crate::model::Episode;
use crate::rng::{derive, seeded};
use crate::sampler::{sample_episode, SampleError, SamplerConfig};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("episode {episode}, query {query}: original and deduplicated predictions differ")]
    EquivalenceViolation { episode: usize, query: String },
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(String),
    #[error("episode {0} has no queries left after warmup")]
    NoTimedQueries(usize),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bench table line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub label_counts: Vec<usize>,
    pub episodes_per_point: usize,
    pub queries_per_episode: usize,
    pub k_shot: usize,
    /// Data template; `num_labels` is overridden by the largest label count.
    pub template: SyntheticSpec,
    pub warmup_queries: usize,
    pub max_labels_per_item: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            label_counts: vec![20, 30, 40, 50, 60],
            episodes_per_point: 5,
            queries_per_episode: 100,
            k_shot: 3,
            template: SyntheticSpec {
                num_labels: 60,
                items_per_split: 400,
                mean_labels: 3.0,
                max_labels_per_item: 12,
                dim: 128,
                ..SyntheticSpec::default()
            },
            warmup_queries: 10,
            max_labels_per_item: crate::engine::DEFAULT_MAX_LABELS_PER_ITEM,
            seed: 0,
        }
    }
}

impl BenchConfig {
    fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::InvalidConfig(m.to_owned()));
        if self.label_counts.is_empty() {
            return bad("no label counts");
        }
        if self.label_counts.windows(2).any(|w| w[0] >= w[1]) {
            return bad("label counts must be strictly ascending");
        }
        if self.label_counts[0] == 0 {
            return bad("label counts must be positive");
        }
        if self.episodes_per_point == 0 || self.queries_per_episode == 0 || self.k_shot == 0 {
            return bad("episode, query and shot counts must be positive");
        }
        Ok(())
    }

    fn spec_for_episode(&self, episode: usize) -> SyntheticSpec {
        SyntheticSpec {
            num_labels: *self.label_counts.last().expect("validated"),
            min_carriers: self.template.min_carriers.max(self.k_shot),
            seed: derive(self.seed, 2 * episode as u64),
            ..self.template.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub num_labels: usize,
    /// Mean `|L|` over episodes.
    pub classes: f64,
    /// Mean `M` over episodes.
    pub prototypes: f64,
    pub t_orig_ms: f64,
    pub t_opt_ms: f64,
    pub speedup: f64,
    pub classes_std: f64,
    pub prototypes_std: f64,
    pub t_orig_std_ms: f64,
    pub t_opt_std_ms: f64,
    pub t_orig_median_ms: f64,
    pub t_opt_median_ms: f64,
    pub episodes: usize,
    pub timed_queries: usize,
}

const HEADER: &str = "num_labels,L,M,t_orig_ms,t_opt_ms,speedup,L_std,M_std,t_orig_std_ms,t_opt_std_ms,t_orig_median_ms,t_opt_median_ms,episodes,timed_queries";

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

struct EpisodeTiming {
    classes: usize,
    prototypes: usize,
    t_orig: Vec<f64>,
    t_opt: Vec<f64>,
}

fn time_episode(
    episode: &Episode,
    number: usize,
    config: &BenchConfig,
    order_seed: u64,
) -> Result<EpisodeTiming, BenchError> {
    let original = build_prototypes_original(&episode.support, config.max_labels_per_item)?;
    let index = build_prototype_index(&episode.support, config.max_labels_per_item)?;

    let mut order: Vec<usize> = (0..episode.queries.len()).collect();
    order.shuffle(&mut seeded(order_seed));
    let warmup = config.warmup_queries.min(order.len());
    let timed = &order[warmup..order.len().min(warmup + config.queries_per_episode)];
    if timed.is_empty() {
        return Err(BenchError::NoTimedQueries(number));
    }
    for &q in &order[..warmup] {
        classify_original(&episode.queries[q], &original)?;
        classify(&episode.queries[q], &index)?;
    }

    let mut t_orig = Vec::with_capacity(timed.len());
    let mut t_opt = Vec::with_capacity(timed.len());
    for &q in timed {
        let query = &episode.queries[q];
        let start = Instant::now();
        let a = classify_original(query, &original)?;
        let mid = Instant::now();
        let b = classify(query, &index)?;
        let end = Instant::now();
        if a.labels != b.labels {
            return Err(BenchError::EquivalenceViolation {
                episode: number,
                query: query.id.clone(),
            });
        }
        t_orig.push((mid - start).as_secs_f64() * 1e3);
        t_opt.push((end - mid).as_secs_f64() * 1e3);
    }
    Ok(EpisodeTiming {
        classes: original.len(),
        prototypes: index.len(),
        t_orig,
        t_opt,
    })
}

/// Runs the sweep, reporting progress through `progress`.
///
/// Datasets are generated in parallel up front; all timing runs on the
/// calling thread.
pub fn run_benchmark_with_progress(
    config: &BenchConfig,
    mut progress: impl FnMut(&str),
) -> Result<Vec<BenchRow>, BenchError> {
    config.validate()?;
    let datasets: Vec<SyntheticDataset> = (0..config.episodes_per_point)
        .into_par_iter()
        .map(|e| generate_synthetic(&config.spec_for_episode(e)))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(config.label_counts.len());
    for &n in &config.label_counts {
        let mut timings = Vec::with_capacity(datasets.len());
        for (e, data) in datasets.iter().enumerate() {
            let sampler = SamplerConfig::new(n)
                .with_k_shot(config.k_shot)
                .with_seed(derive(config.seed, 2 * e as u64 + 1));
            let episode = sample_episode(&data.manifest, &data.store, &sampler)?;
            let timing = time_episode(&episode, e, config, derive(config.seed, 1_000 + e as u64))?;
            progress(&format!(
                "labels {n} episode {e}: |L| {} M {} queries {}",
                timing.classes,
                timing.prototypes,
                timing.t_orig.len()
            ));
            timings.push(timing);
        }
        rows.push(summarize(n, &timings));
    }
    Ok(rows)
}

pub fn run_benchmark(config: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    run_benchmark_with_progress(config, |_| {})
}

fn summarize(num_labels: usize, timings: &[EpisodeTiming]) -> BenchRow {
    let classes: Vec<f64> = timings.iter().map(|t| t.classes as f64).collect();
    let prototypes: Vec<f64> = timings.iter().map(|t| t.prototypes as f64).collect();
    let mut orig: Vec<f64> = timings.iter().flat_map(|t| t.t_orig.iter().copied()).collect();
    let mut opt: Vec<f64> = timings.iter().flat_map(|t| t.t_opt.iter().copied()).collect();
    let (classes, classes_std) = mean_std(&classes);
    let (prototypes, prototypes_std) = mean_std(&prototypes);
    let (t_orig_ms, t_orig_std_ms) = mean_std(&orig);
    let (t_opt_ms, t_opt_std_ms) = mean_std(&opt);
    BenchRow {
        num_labels,
        classes,
        prototypes,
        t_orig_ms,
        t_opt_ms,
        speedup: t_orig_ms / t_opt_ms,
        classes_std,
        prototypes_std,
        t_orig_std_ms,
        t_opt_std_ms,
        t_orig_median_ms: median(&mut orig),
        t_opt_median_ms: median(&mut opt),
        episodes: timings.len(),
        timed_queries: opt.len(),
    }
}

/// CSV text, rows in ascending `num_labels`.
pub fn bench_table_to_string(rows: &[BenchRow]) -> String {
    let mut sorted: Vec<&BenchRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.num_labels);
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.num_labels,
            r.classes,
            r.prototypes,
            r.t_orig_ms,
            r.t_opt_ms,
            r.speedup,
            r.classes_std,
            r.prototypes_std,
            r.t_orig_std_ms,
            r.t_opt_std_ms,
            r.t_orig_median_ms,
            r.t_opt_median_ms,
            r.episodes,
            r.timed_queries
        ));
    }
    out
}

pub fn emit_bench_table(rows: &[BenchRow], path: impl AsRef<Path>) -> Result<(), BenchError> {
    if rows.is_empty() {
        return Err(BenchError::InvalidConfig("no rows to write".into()));
    }
    fs::write(path, bench_table_to_string(rows))?;
    Ok(())
}

pub fn parse_bench_table(text: &str) -> Result<Vec<BenchRow>, BenchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        _ => {
            return Err(BenchError::Parse {
                line: 1,
                message: "unexpected header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let err = |message: String| BenchError::Parse { line: i + 1, message };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 14 {
                return Err(err(format!("{} fields, expected 14", fields.len())));
            }
            let f = |k: usize| fields[k].parse::<f64>().map_err(|e| err(format!("field {k}: {e}")));
            let u = |k: usize| fields[k].parse::<usize>().map_err(|e| err(format!("field {k}: {e}")));
            Ok(BenchRow {
                num_labels: u(0)?,
                classes: f(1)?,
                prototypes: f(2)?,
                t_orig_ms: f(3)?,
                t_opt_ms: f(4)?,
                speedup: f(5)?,
                classes_std: f(6)?,
                prototypes_std: f(7)?,
                t_orig_std_ms: f(8)?,
                t_opt_std_ms: f(9)?,
                t_orig_median_ms: f(10)?,
                t_opt_median_ms: f(11)?,
                episodes: u(12)?,
                timed_queries: u(13)?,
            })
        })
        .collect()
}

pub fn read_bench_table(path: impl AsRef<Path>) -> Result<Vec<BenchRow>, BenchError> {
    parse_bench_table(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchConfig {
        BenchConfig {
            label_counts: vec![8, 12],
            episodes_per_point: 2,
            queries_per_episode: 20,
            template: SyntheticSpec {
                items_per_split: 80,
                max_labels_per_item: 6,
                dim: 16,
                ..SyntheticSpec::default()
            },
            ..BenchConfig::default()
        }
    }

    fn row(n: usize, speedup: f64) -> BenchRow {
        BenchRow {
            num_labels: n,
            classes: 10.5,
            prototypes: 3.25,
            t_orig_ms: 0.1 + 1e-7,
            t_opt_ms: 0.1 / speedup,
            speedup,
            classes_std: 0.5,
            prototypes_std: 1.0 / 3.0,
            t_orig_std_ms: 1e-3,
            t_opt_std_ms: 2e-4,
            t_orig_median_ms: 0.09,
            t_opt_median_ms: 0.01,
            episodes: 2,
            timed_queries: 40,
        }
    }

    #[test]
    fn small_sweep_has_one_row_per_count() {
        let rows = run_benchmark(&small()).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!(r.prototypes <= r.classes);
            assert!(r.t_orig_ms > 0.0 && r.t_opt_ms > 0.0);
            assert_eq!(r.timed_queries, 40);
        }
        assert!(rows[1].classes >= rows[0].classes);
    }

    #[test]
    fn single_label_items_do_not_dedup() {
        let mut cfg = small();
        cfg.template.max_labels_per_item = 1;
        for r in run_benchmark(&cfg).unwrap() {
            assert_eq!(r.classes, r.prototypes);
            assert_eq!(r.classes, r.num_labels as f64);
        }
    }

    #[test]
    fn table_sorts_and_round_trips() {
        let rows = vec![row(30, 4.0), row(20, 2.0)];
        let text = bench_table_to_string(&rows);
        assert!(text.starts_with("num_labels,L,M,t_orig_ms,t_opt_ms,speedup,"));
        let back = parse_bench_table(&text).unwrap();
        assert_eq!(back, vec![row(20, 2.0), row(30, 4.0)]);
        assert_eq!(bench_table_to_string(&[row(20, 2.0)]).lines().count(), 2);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = small();
        cfg.label_counts = vec![12, 8];
        assert!(matches!(run_benchmark(&cfg), Err(BenchError::InvalidConfig(_))));
        cfg.label_counts = vec![];
        assert!(matches!(run_benchmark(&cfg), Err(BenchError::InvalidConfig(_))));
        assert!(emit_bench_table(&[], "/nonexistent").is_err());
    }
}
