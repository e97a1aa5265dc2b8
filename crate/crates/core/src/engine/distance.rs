use super::EngineError;
use crate::model::EmbeddingVector;

/// `1 - cos(a, b)`, accumulated in `f64`.
pub fn cosine_distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EngineError> {
    if a.dim() != b.dim() {
        return Err(EngineError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return Err(EngineError::ZeroNormVector);
    }
    Ok(unchecked(a, b))
}

/// Shared by every classifier so that equal inputs give bit-equal distances.
#[inline]
pub(super) fn unchecked(a: &EmbeddingVector, b: &EmbeddingVector) -> f64 {
    1.0 - a.dot(b) / (a.norm() * b.norm())
}
