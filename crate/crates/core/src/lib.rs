//! Multi-label few-shot classification with label-combination prototypes.
//!
//! The crate works on precomputed embedding vectors. [`engine`] builds one
//! prototype per label combination found in a support set and deduplicates
//! combinations that share the same contributing items; [`sampler`] draws
//! N-way K-shot episodes; [`probe`] trains a shallow MLP head whose hidden
//! layer can serve as an alternative feature space; [`metrics`] scores the
//! results; [`io`] holds the file formats and a synthetic data generator; and
//! [`scalability`] times the original and deduplicated classifiers.

pub mod engine;
pub mod evaluation;
pub mod io;
pub mod labels;
pub mod metrics;
pub mod model;
pub mod probe;
pub mod sampler;
pub mod scalability;

mod rng;

pub use engine::{
    build_prototype_index, build_prototypes_original, classify, classify_original,
    cosine_distance, enumerate_lc_classes, extent_of, EngineError, Extent, Prediction,
    PrototypeIndex, UniquePrototype, DEFAULT_MAX_LABELS_PER_ITEM,
};
pub use labels::{LabelError, LabelSet, LabelVocabulary, MAX_LABELS};
pub use model::{
    validate_episode, EmbeddingError, EmbeddingVector, Episode, QueryItem, SupportItem,
    ValidationReport, Violation,
};
