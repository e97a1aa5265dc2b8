//! Label-combination prototypes and nearest-prototype classification.
//!
//! Every non-empty subset of a support item's label set is an LC-class. The
//! prototype of a class is the mean embedding of the support items whose
//! labels contain it (its *extent*). Classes with identical extents share one
//! prototype, so the deduplicated [`PrototypeIndex`] holds `M <= |L|` vectors
//! while predicting exactly what the brute-force search over all `|L|`
//! class prototypes predicts.

mod classes;
mod classify;
mod distance;
mod prototype;

use thiserror::Error;

pub use classes::{enumerate_lc_classes, extent_of, Extent, LcClassSet};
pub use classify::{classify, classify_original, Prediction};
pub use distance::cosine_distance;
pub use prototype::{
    build_prototype_index, build_prototypes_original, mean_embedding, ClassPrototype,
    PrototypeIndex, UniquePrototype,
};

/// Default bound on labels per support item; `2^20` subsets per item at most.
pub const DEFAULT_MAX_LABELS_PER_ITEM: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("support set is empty")]
    EmptySupport,
    #[error("support item {item_id} has {count} labels, above the cap of {cap}")]
    LabelCapExceeded {
        item_id: String,
        count: usize,
        cap: usize,
    },
    #[error("support item {item_id} has no labels")]
    EmptyLabelSet { item_id: String },
    #[error("label combination is not contained in any support item")]
    ClassNotInL,
    #[error("label combination is empty")]
    EmptyClass,
    #[error("vector has zero norm")]
    ZeroNormVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("prototype index is empty")]
    EmptyIndex,
}
