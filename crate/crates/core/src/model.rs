//! Embeddings, support/query items and episodes.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::labels::{LabelSet, LabelVocabulary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("embedding has zero dimensions")]
    Empty,
    #[error("embedding value at position {0} is not finite")]
    NonFinite(usize),
}

/// A finite `f32` vector with its Euclidean norm cached at 64-bit precision.
///
/// Cloning is cheap; the values are shared.
#[derive(Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Arc<[f32]>,
    norm: f64,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self, EmbeddingError> {
        if values.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite(pos));
        }
        let norm = values
            .iter()
            .map(|&v| f64::from(v) * f64::from(v))
            .sum::<f64>()
            .sqrt();
        Ok(Self {
            values: values.into(),
            norm,
        })
    }

    /// Rounds 64-bit values to storage precision.
    pub fn from_f64(values: &[f64]) -> Result<Self, EmbeddingError> {
        Self::new(values.iter().map(|&v| v as f32).collect())
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Dot product accumulated in `f64`, in ascending coordinate order.
    pub fn dot(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| f64::from(a) * f64::from(b))
            .sum()
    }
}

impl fmt::Debug for EmbeddingVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.values.iter()).finish()
    }
}

/// A labelled example whose embedding defines prototypes.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportItem {
    pub id: String,
    pub embedding: EmbeddingVector,
    pub labels: LabelSet,
}

impl SupportItem {
    pub fn new(id: impl Into<String>, embedding: EmbeddingVector, labels: LabelSet) -> Self {
        Self {
            id: id.into(),
            embedding,
            labels,
        }
    }
}

/// An item to classify; `truth` is present when evaluating.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryItem {
    pub id: String,
    pub embedding: EmbeddingVector,
    pub truth: Option<LabelSet>,
}

impl QueryItem {
    pub fn new(id: impl Into<String>, embedding: EmbeddingVector) -> Self {
        Self {
            id: id.into(),
            embedding,
            truth: None,
        }
    }

    pub fn with_truth(mut self, truth: LabelSet) -> Self {
        self.truth = Some(truth);
        self
    }
}

/// One N-way K-shot evaluation unit.
#[derive(Debug, Clone)]
pub struct Episode {
    pub vocabulary: LabelVocabulary,
    pub support: Vec<SupportItem>,
    pub queries: Vec<QueryItem>,
    pub n_way: usize,
    pub k_shot: usize,
}

impl Episode {
    pub fn dim(&self) -> Option<usize> {
        self.support.first().map(|s| s.embedding.dim())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptySupportLabels { item: String },
    LabelOutOfRange { item: String, label: usize },
    InsufficientShots { label: String, have: usize, need: usize },
    Overlap { id: String },
    DuplicateId { id: String },
    DimensionMismatch { item: String, expected: usize, found: usize },
    WayMismatch { n_way: usize, vocabulary: usize },
    ZeroShots,
    EmptySupport,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptySupportLabels { item } => write!(f, "support item {item}: empty label set"),
            Violation::LabelOutOfRange { item, label } => {
                write!(f, "item {item}: label id {label} outside vocabulary")
            }
            Violation::InsufficientShots { label, have, need } => {
                write!(f, "label {label}: {have} < {need} shots")
            }
            Violation::Overlap { id } => write!(f, "overlap: {id}"),
            Violation::DuplicateId { id } => write!(f, "duplicate id: {id}"),
            Violation::DimensionMismatch { item, expected, found } => {
                write!(f, "item {item}: dim {found} != {expected}")
            }
            Violation::WayMismatch { n_way, vocabulary } => {
                write!(f, "n_way {n_way} != vocabulary size {vocabulary}")
            }
            Violation::ZeroShots => write!(f, "k_shot must be at least 1"),
            Violation::EmptySupport => write!(f, "support set is empty"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every episode invariant and reports each violation found.
pub fn validate_episode(episode: &Episode) -> ValidationReport {
    let mut violations = Vec::new();
    let vocab_len = episode.vocabulary.len();

    if episode.k_shot == 0 {
        violations.push(Violation::ZeroShots);
    }
    if episode.n_way != vocab_len {
        violations.push(Violation::WayMismatch {
            n_way: episode.n_way,
            vocabulary: vocab_len,
        });
    }
    if episode.support.is_empty() {
        violations.push(Violation::EmptySupport);
    }

    let expected_dim = episode.dim();
    let check_dim = |item: &str, dim: usize, out: &mut Vec<Violation>| {
        if let Some(expected) = expected_dim {
            if dim != expected {
                out.push(Violation::DimensionMismatch {
                    item: item.to_owned(),
                    expected,
                    found: dim,
                });
            }
        }
    };

    let mut shots: HashMap<usize, usize> = HashMap::new();
    let mut support_ids = HashSet::new();
    for item in &episode.support {
        if !support_ids.insert(item.id.as_str()) {
            violations.push(Violation::DuplicateId { id: item.id.clone() });
        }
        if item.labels.is_empty() {
            violations.push(Violation::EmptySupportLabels { item: item.id.clone() });
        }
        for label in &item.labels {
            if label >= vocab_len {
                violations.push(Violation::LabelOutOfRange {
                    item: item.id.clone(),
                    label,
                });
            } else {
                *shots.entry(label).or_default() += 1;
            }
        }
        check_dim(&item.id, item.embedding.dim(), &mut violations);
    }

    for (label, name) in episode.vocabulary.names().iter().enumerate() {
        let have = shots.get(&label).copied().unwrap_or(0);
        if have < episode.k_shot {
            violations.push(Violation::InsufficientShots {
                label: name.clone(),
                have,
                need: episode.k_shot,
            });
        }
    }

    let mut query_ids = HashSet::new();
    for query in &episode.queries {
        if !query_ids.insert(query.id.as_str()) {
            violations.push(Violation::DuplicateId { id: query.id.clone() });
        }
        if support_ids.contains(query.id.as_str()) {
            violations.push(Violation::Overlap { id: query.id.clone() });
        }
        if let Some(truth) = &query.truth {
            for label in truth.iter().filter(|&l| l >= vocab_len) {
                violations.push(Violation::LabelOutOfRange {
                    item: query.id.clone(),
                    label,
                });
            }
        }
        check_dim(&query.id, query.embedding.dim(), &mut violations);
    }

    ValidationReport { violations }
}
