//! Fixtures for the criterion benchmarks.

use lcp_core::io::{generate_synthetic, SyntheticSpec};
use lcp_core::sampler::{sample_episode, SamplerConfig};
use lcp_core::Episode;

/// Cap on labels per support item, matching the benchmark sweep.
pub const MAX_LABELS_PER_ITEM: usize = 20;

/// An all-label, 3-shot episode over a synthetic dataset with `num_labels`
/// labels and 128-dimensional embeddings.
pub fn episode(num_labels: usize, seed: u64) -> Episode {
    let spec = SyntheticSpec {
        num_labels,
        items_per_split: 400,
        max_labels_per_item: 12,
        dim: 128,
        seed,
        ..SyntheticSpec::default()
    };
    let data = generate_synthetic(&spec).expect("fixture spec is feasible");
    let config = SamplerConfig::new(num_labels).with_seed(seed);
    sample_episode(&data.manifest, &data.store, &config).expect("fixture episode samples")
}
