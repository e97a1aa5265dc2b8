use std::cmp::Ordering;

use super::classes::Extent;
use super::distance::unchecked;
use super::prototype::{ClassPrototype, PrototypeIndex};
use super::EngineError;
use crate::labels::LabelSet;
use crate::model::{EmbeddingVector, QueryItem};

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub query_id: String,
    pub labels: LabelSet,
    pub distance: f64,
    pub prototype_extent: Extent,
}

/// Orders candidates: nearer first, then larger label set, then smaller id
/// tuple. Distances are compared exactly.
fn better(distance: f64, labels: &LabelSet, best_distance: f64, best_labels: &LabelSet) -> Ordering {
    distance
        .total_cmp(&best_distance)
        .then_with(|| best_labels.len().cmp(&labels.len()))
        .then_with(|| labels.cmp_lex(best_labels))
}

fn check_query(query: &EmbeddingVector, dim: usize) -> Result<(), EngineError> {
    if query.dim() != dim {
        return Err(EngineError::DimensionMismatch {
            expected: dim,
            found: query.dim(),
        });
    }
    if query.norm() == 0.0 {
        return Err(EngineError::ZeroNormVector);
    }
    Ok(())
}

/// Nearest unique prototype; predicts its largest LC-class.
pub fn classify(query: &QueryItem, index: &PrototypeIndex) -> Result<Prediction, EngineError> {
    if index.is_empty() {
        return Err(EngineError::EmptyIndex);
    }
    check_query(&query.embedding, index.dim())?;

    let mut best: Option<(f64, usize)> = None;
    for (pos, proto) in index.prototypes().iter().enumerate() {
        if proto.vector().norm() == 0.0 {
            return Err(EngineError::ZeroNormVector);
        }
        let d = unchecked(&query.embedding, proto.vector());
        let replace = match best {
            None => true,
            Some((bd, bp)) => {
                let incumbent = &index.prototypes()[bp];
                better(d, proto.best_class(), bd, incumbent.best_class())
                    .then_with(|| proto.extent().cmp(incumbent.extent()))
                    == Ordering::Less
            }
        };
        if replace {
            best = Some((d, pos));
        }
    }

    let (distance, pos) = best.expect("index is non-empty");
    let winner = &index.prototypes()[pos];
    Ok(Prediction {
        query_id: query.id.clone(),
        labels: *winner.best_class(),
        distance,
        prototype_extent: winner.extent().clone(),
    })
}

/// Brute-force search over one prototype per LC-class.
pub fn classify_original(
    query: &QueryItem,
    prototypes: &[ClassPrototype],
) -> Result<Prediction, EngineError> {
    let first = prototypes.first().ok_or(EngineError::EmptyIndex)?;
    check_query(&query.embedding, first.vector.dim())?;

    let mut best: Option<(f64, usize)> = None;
    for (pos, proto) in prototypes.iter().enumerate() {
        if proto.vector.dim() != first.vector.dim() {
            return Err(EngineError::DimensionMismatch {
                expected: first.vector.dim(),
                found: proto.vector.dim(),
            });
        }
        if proto.vector.norm() == 0.0 {
            return Err(EngineError::ZeroNormVector);
        }
        let d = unchecked(&query.embedding, &proto.vector);
        let replace = match best {
            None => true,
            Some((bd, bp)) => better(d, &proto.class, bd, &prototypes[bp].class) == Ordering::Less,
        };
        if replace {
            best = Some((d, pos));
        }
    }

    let (distance, pos) = best.expect("prototype list is non-empty");
    let winner = &prototypes[pos];
    Ok(Prediction {
        query_id: query.id.clone(),
        labels: winner.class,
        distance,
        prototype_extent: winner.extent.clone(),
    })
}
