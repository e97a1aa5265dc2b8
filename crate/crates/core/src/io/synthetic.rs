use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand_distr::StandardNormal;

use super::{EmbeddingStore, FormatError};
use crate::labels::{LabelSet, LabelVocabulary};
use crate::model::EmbeddingVector;
use crate::rng::{derive, seeded, Rng};
use crate::sampler::{DatasetManifest, ManifestItem, Split};

const SPLITS: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

/// Clustered multi-label data: each label owns a random unit centroid and an
/// item sits at the normalized mean of its labels' centroids plus noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub num_labels: usize,
    pub items_per_split: usize,
    /// Poisson rate of the labels-per-item count, truncated to
    /// `1..=max_labels_per_item`.
    pub mean_labels: f64,
    pub max_labels_per_item: usize,
    pub dim: usize,
    pub centroid_scale: f64,
    /// Per-coordinate standard deviation.
    pub noise_scale: f64,
    /// Carriers every label needs in every split.
    pub min_carriers: usize,
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            num_labels: 20,
            items_per_split: 200,
            mean_labels: 3.0,
            max_labels_per_item: 8,
            dim: 32,
            centroid_scale: 1.0,
            noise_scale: 0.1,
            min_carriers: 3,
            max_attempts: 32,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<(), FormatError> {
        let positive = [
            ("num_labels", self.num_labels),
            ("items_per_split", self.items_per_split),
            ("max_labels_per_item", self.max_labels_per_item),
            ("dim", self.dim),
            ("max_attempts", self.max_attempts),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(FormatError::InvalidSpec(format!("{name} must be positive")));
            }
        }
        if !(self.mean_labels > 0.0 && self.mean_labels.is_finite()) {
            return Err(FormatError::InvalidSpec("mean_labels must be positive".into()));
        }
        if !(self.centroid_scale > 0.0 && self.centroid_scale.is_finite()) {
            return Err(FormatError::InvalidSpec("centroid_scale must be positive".into()));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(FormatError::InvalidSpec("noise_scale must be non-negative".into()));
        }
        if self.num_labels > crate::labels::MAX_LABELS {
            return Err(FormatError::InvalidSpec(format!(
                "at most {} labels",
                crate::labels::MAX_LABELS
            )));
        }
        let slots = self.items_per_split.saturating_mul(self.max_labels_per_item.min(self.num_labels));
        if slots < self.num_labels.saturating_mul(self.min_carriers) {
            return Err(FormatError::SpecInfeasible(format!(
                "{} items with at most {} labels each cannot give {} labels {} carriers",
                self.items_per_split, self.max_labels_per_item, self.num_labels, self.min_carriers
            )));
        }
        Ok(())
    }

    /// The count distribution over `1..=cap`, cap bounded by `num_labels`.
    fn count_weights(&self) -> Vec<f64> {
        let cap = self.max_labels_per_item.min(self.num_labels);
        let mut weights = Vec::with_capacity(cap);
        // λ^k / k!, built incrementally
        let mut w = 1.0;
        for k in 1..=cap {
            w *= self.mean_labels / k as f64;
            weights.push(w);
        }
        weights
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub manifest: DatasetManifest,
    pub store: EmbeddingStore,
}

fn unit_gaussian(rng: &mut Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

struct Draft {
    items: Vec<ManifestItem>,
    vectors: Vec<EmbeddingVector>,
}

fn draft(spec: &SyntheticSpec, seed: u64) -> Result<Option<Draft>, FormatError> {
    let mut rng = seeded(seed);
    let centroids: Vec<Vec<f64>> = (0..spec.num_labels)
        .map(|_| unit_gaussian(&mut rng, spec.dim))
        .collect();
    let counts = WeightedIndex::new(spec.count_weights())
        .map_err(|e| FormatError::InvalidSpec(e.to_string()))?;

    let mut items = Vec::with_capacity(3 * spec.items_per_split);
    let mut vectors = Vec::with_capacity(3 * spec.items_per_split);
    for split in SPLITS {
        let mut carriers = vec![0usize; spec.num_labels];
        for i in 0..spec.items_per_split {
            let count = counts.sample(&mut rng) + 1;
            let labels: LabelSet = index::sample(&mut rng, spec.num_labels, count).into_iter().collect();
            let mut mean = vec![0f64; spec.dim];
            for l in &labels {
                carriers[l] += 1;
                for (m, c) in mean.iter_mut().zip(&centroids[l]) {
                    *m += c;
                }
            }
            let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
            let embedding: Vec<f64> = mean
                .iter()
                .map(|m| {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    // Antipodal centroids can cancel; fall back to the raw mean.
                    let dir = if norm > 1e-12 { m / norm } else { *m };
                    dir * spec.centroid_scale + noise * spec.noise_scale
                })
                .collect();
            vectors.push(EmbeddingVector::from_f64(&embedding).map_err(|e| {
                FormatError::NonFiniteValue(format!("generated item: {e}"))
            })?);
            items.push(ManifestItem {
                id: format!("{}-{i:05}", split.as_str()),
                split,
                labels,
            });
        }
        if carriers.iter().any(|&c| c < spec.min_carriers) {
            return Ok(None);
        }
    }
    Ok(Some(Draft { items, vectors }))
}

/// Generates a manifest and matching store. Identical specs give identical
/// bytes. Draws are retried with derived seeds until every label has
/// `min_carriers` carriers in each split.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticDataset, FormatError> {
    spec.validate()?;
    let vocab = LabelVocabulary::new((0..spec.num_labels).map(|i| format!("label_{i}")))?;
    for attempt in 0..spec.max_attempts {
        let seed = if attempt == 0 { spec.seed } else { derive(spec.seed, attempt as u64) };
        let Some(d) = draft(spec, seed)? else {
            continue;
        };
        let mut store = EmbeddingStore::new(spec.dim);
        for (item, v) in d.items.iter().zip(d.vectors) {
            store.insert(item.id.clone(), v)?;
        }
        let manifest = DatasetManifest::new(vocab, d.items)?;
        return Ok(SyntheticDataset { manifest, store });
    }
    Err(FormatError::SpecInfeasible(format!(
        "no draw in {} attempts gave every label {} carriers per split",
        spec.max_attempts, spec.min_carriers
    )))
}
