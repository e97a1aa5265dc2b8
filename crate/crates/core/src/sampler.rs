//! N-way K-shot multi-label episode sampling.
//!
//! Support items are drawn rarest label first: for each label still short
//! of `k_shot` carriers in the support set, carriers are drawn uniformly
//! without replacement, and every drawn item counts toward all of its labels.
//! Queries are every test-split item outside the support.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use thiserror::Error;

use crate::labels::{LabelError, LabelSet, LabelVocabulary};
use crate::model::{EmbeddingVector, Episode, QueryItem, SupportItem};
use crate::rng::{seeded, Rng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("label {label}: {have} eligible items, {need} needed")]
    InsufficientItems {
        label: String,
        have: usize,
        need: usize,
    },
    #[error("no embedding for item {0}")]
    MissingEmbedding(String),
    #[error("only {eligible} labels have enough carriers, {requested} requested")]
    NotEnoughEligibleLabels { requested: usize, eligible: usize },
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("support sampling exceeded {0} draws")]
    AttemptsExhausted(usize),
    #[error("embedding dimension mismatch for item {id}: expected {expected}, found {found}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate item id {0}")]
    DuplicateId(String),
    #[error("item {id}: {source}")]
    Label {
        id: String,
        #[source]
        source: LabelError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestItem {
    pub id: String,
    pub split: Split,
    pub labels: LabelSet,
}

/// Labelled items with their splits, over one vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    vocabulary: LabelVocabulary,
    items: Vec<ManifestItem>,
}

impl DatasetManifest {
    pub fn new(vocabulary: LabelVocabulary, items: Vec<ManifestItem>) -> Result<Self, SampleError> {
        let mut seen = HashSet::with_capacity(items.len());
        for item in &items {
            if !seen.insert(item.id.as_str()) {
                return Err(SampleError::DuplicateId(item.id.clone()));
            }
            if item.labels.bound() > vocabulary.len() {
                return Err(SampleError::Label {
                    id: item.id.clone(),
                    source: LabelError::IdOutOfRange(item.labels.bound() - 1),
                });
            }
        }
        Ok(Self { vocabulary, items })
    }

    pub fn vocabulary(&self) -> &LabelVocabulary {
        &self.vocabulary
    }

    pub fn items(&self) -> &[ManifestItem] {
        &self.items
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestItem> {
        self.items.iter().filter(move |i| i.split == split)
    }
}

/// Source of item embeddings keyed by id.
pub trait EmbeddingLookup {
    fn embedding(&self, id: &str) -> Option<&EmbeddingVector>;
}

impl EmbeddingLookup for HashMap<String, EmbeddingVector> {
    fn embedding(&self, id: &str) -> Option<&EmbeddingVector> {
        self.get(id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerConfig {
    pub n_way: usize,
    pub k_shot: usize,
    pub seed: u64,
    pub support_splits: Vec<Split>,
    pub max_support_attempts: usize,
}

impl SamplerConfig {
    pub const DEFAULT_K_SHOT: usize = 3;

    pub fn new(n_way: usize) -> Self {
        Self {
            n_way,
            k_shot: Self::DEFAULT_K_SHOT,
            seed: 0,
            support_splits: vec![Split::Train, Split::Valid],
            max_support_attempts: 1_000_000,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_k_shot(mut self, k_shot: usize) -> Self {
        self.k_shot = k_shot;
        self
    }

    fn validate(&self, vocab_len: usize) -> Result<(), SampleError> {
        if self.k_shot == 0 {
            return Err(SampleError::InvalidConfig("k_shot must be at least 1".into()));
        }
        if self.n_way == 0 || self.n_way > vocab_len {
            return Err(SampleError::InvalidConfig(format!(
                "n_way {} must be within 1..={vocab_len}",
                self.n_way
            )));
        }
        if self.support_splits.is_empty() {
            return Err(SampleError::InvalidConfig("no support splits".into()));
        }
        Ok(())
    }
}

struct Carriers {
    support: Vec<Vec<usize>>,
    test: Vec<usize>,
}

fn count_carriers(manifest: &DatasetManifest, splits: &[Split]) -> Carriers {
    let n = manifest.vocabulary.len();
    let mut support = vec![Vec::new(); n];
    let mut test = vec![0; n];
    for (idx, item) in manifest.items.iter().enumerate() {
        let in_support = splits.contains(&item.split);
        for label in &item.labels {
            if in_support {
                support[label].push(idx);
            }
            if item.split == Split::Test {
                test[label] += 1;
            }
        }
    }
    Carriers { support, test }
}

fn eligible_labels(manifest: &DatasetManifest, config: &SamplerConfig) -> Vec<usize> {
    let carriers = count_carriers(manifest, &config.support_splits);
    (0..manifest.vocabulary.len())
        .filter(|&l| carriers.support[l].len() >= config.k_shot && carriers.test[l] > 0)
        .collect()
}

fn choose_labels(
    manifest: &DatasetManifest,
    config: &SamplerConfig,
    rng: &mut Rng,
) -> Result<Vec<usize>, SampleError> {
    let mut eligible = eligible_labels(manifest, config);
    if eligible.len() < config.n_way {
        return Err(SampleError::NotEnoughEligibleLabels {
            requested: config.n_way,
            eligible: eligible.len(),
        });
    }
    // The whole list is shuffled regardless of n, so one seed yields nested
    // selections as n grows.
    eligible.shuffle(rng);
    let mut chosen = eligible[..config.n_way].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Picks `config.n_way` labels with at least `k_shot` carriers in the support
/// splits and one in the test split. Deterministic per seed; selections for
/// the same seed are nested as `n_way` grows.
pub fn select_n_way_labels(
    manifest: &DatasetManifest,
    config: &SamplerConfig,
) -> Result<Vec<usize>, SampleError> {
    config.validate(manifest.vocabulary.len())?;
    choose_labels(manifest, config, &mut seeded(config.seed))
}

fn lookup<S: EmbeddingLookup + ?Sized>(
    store: &S,
    id: &str,
    dim: &mut Option<usize>,
) -> Result<EmbeddingVector, SampleError> {
    let e = store
        .embedding(id)
        .ok_or_else(|| SampleError::MissingEmbedding(id.to_owned()))?;
    match *dim {
        Some(expected) if expected != e.dim() => Err(SampleError::DimensionMismatch {
            id: id.to_owned(),
            expected,
            found: e.dim(),
        }),
        _ => {
            *dim = Some(e.dim());
            Ok(e.clone())
        }
    }
}

/// Draws one episode.
///
/// When `n_way` equals the vocabulary size every label takes part; otherwise
/// a seeded subset is chosen and all label sets are projected onto it, with
/// ids renumbered densely in ascending original order. Items left with no
/// label after projection take no part in the episode.
pub fn sample_episode<S: EmbeddingLookup + ?Sized>(
    manifest: &DatasetManifest,
    store: &S,
    config: &SamplerConfig,
) -> Result<Episode, SampleError> {
    let vocab = &manifest.vocabulary;
    config.validate(vocab.len())?;
    let mut rng = seeded(config.seed);

    let chosen: Vec<usize> = if config.n_way == vocab.len() {
        (0..vocab.len()).collect()
    } else {
        choose_labels(manifest, config, &mut rng)?
    };
    let mut remap = vec![usize::MAX; vocab.len()];
    for (new, &old) in chosen.iter().enumerate() {
        remap[old] = new;
    }
    let sub_vocab = if chosen.len() == vocab.len() {
        vocab.clone()
    } else {
        LabelVocabulary::new(chosen.iter().map(|&l| vocab.names()[l].clone()))
            .expect("subset of a valid vocabulary")
    };
    let project = |labels: &LabelSet| -> LabelSet {
        labels
            .iter()
            .filter(|&l| remap[l] != usize::MAX)
            .map(|l| remap[l])
            .collect()
    };
    let projected: Vec<LabelSet> = manifest.items.iter().map(|i| project(&i.labels)).collect();

    let n = chosen.len();
    let mut carriers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, item) in manifest.items.iter().enumerate() {
        let in_support = config.support_splits.contains(&item.split);
        for label in &projected[idx] {
            if in_support {
                carriers[label].push(idx);
            }
        }
    }
    for (label, items) in carriers.iter().enumerate() {
        if items.len() < config.k_shot {
            return Err(SampleError::InsufficientItems {
                label: sub_vocab.names()[label].clone(),
                have: items.len(),
                need: config.k_shot,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&l| (carriers[l].len(), l));

    let mut coverage = vec![0usize; n];
    let mut drawn = vec![false; manifest.items.len()];
    let mut draws = 0usize;
    for label in order {
        if coverage[label] >= config.k_shot {
            continue;
        }
        let mut pool: Vec<usize> = carriers[label].iter().copied().filter(|&i| !drawn[i]).collect();
        while coverage[label] < config.k_shot {
            if pool.is_empty() {
                return Err(SampleError::InsufficientItems {
                    label: sub_vocab.names()[label].clone(),
                    have: coverage[label],
                    need: config.k_shot,
                });
            }
            draws += 1;
            if draws > config.max_support_attempts {
                return Err(SampleError::AttemptsExhausted(config.max_support_attempts));
            }
            let pick = pool.swap_remove(rng.random_range(0..pool.len()));
            drawn[pick] = true;
            for l in &projected[pick] {
                coverage[l] += 1;
            }
        }
    }

    let mut dim = None;
    let mut support = Vec::new();
    let mut queries = Vec::new();
    let mut query_coverage = vec![0usize; n];
    for (idx, item) in manifest.items.iter().enumerate() {
        let labels = projected[idx];
        if drawn[idx] {
            let e = lookup(store, &item.id, &mut dim)?;
            support.push(SupportItem::new(item.id.clone(), e, labels));
        } else if item.split == Split::Test && !labels.is_empty() {
            let e = lookup(store, &item.id, &mut dim)?;
            for l in &labels {
                query_coverage[l] += 1;
            }
            queries.push(QueryItem::new(item.id.clone(), e).with_truth(labels));
        }
    }
    if let Some(label) = (0..n).find(|&l| query_coverage[l] == 0) {
        return Err(SampleError::InsufficientItems {
            label: sub_vocab.names()[label].clone(),
            have: 0,
            need: 1,
        });
    }

    Ok(Episode {
        vocabulary: sub_vocab,
        support,
        queries,
        n_way: n,
        k_shot: config.k_shot,
    })
}

/// Line-oriented audit record of an episode's composition.
///
/// ```text
/// n_way<TAB>k_shot<TAB>seed
/// label<TAB>name          one per label, in id order
/// support<TAB>id<TAB>labels
/// query<TAB>id
/// ```
pub fn episode_record(episode: &Episode, seed: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "episode\t{}\t{}\t{seed}", episode.n_way, episode.k_shot);
    for name in episode.vocabulary.names() {
        let _ = writeln!(out, "label\t{name}");
    }
    for item in &episode.support {
        let names: Vec<&str> = item
            .labels
            .iter()
            .filter_map(|l| episode.vocabulary.name(l))
            .collect();
        let _ = writeln!(out, "support\t{}\t{}", item.id, names.join(","));
    }
    for q in &episode.queries {
        let _ = writeln!(out, "query\t{}", q.id);
    }
    out
}
