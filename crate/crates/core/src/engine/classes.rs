use std::collections::HashMap;

use super::EngineError;
use crate::labels::LabelSet;
use crate::model::SupportItem;

/// Ascending support-item indices contributing to a prototype.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Extent(Vec<u32>);

impl Extent {
    pub fn new(mut indices: Vec<u32>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// All LC-classes of a support set, ordered by cardinality then by label-id
/// tuple, each paired with its extent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcClassSet {
    classes: Vec<LabelSet>,
    extents: Vec<Extent>,
}

impl LcClassSet {
    pub fn classes(&self) -> &[LabelSet] {
        &self.classes
    }

    pub fn extents(&self) -> &[Extent] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LabelSet, &Extent)> {
        self.classes.iter().zip(&self.extents)
    }

    pub fn extent(&self, class: &LabelSet) -> Option<&Extent> {
        self.classes
            .binary_search(class)
            .ok()
            .map(|pos| &self.extents[pos])
    }
}

/// Enumerates the union of the non-empty power sets of every support item's
/// labels.
///
/// A class is generated by item `i` exactly when it is a subset of `y_i`, so
/// extents are collected during the same pass, already in ascending order.
pub fn enumerate_lc_classes(
    support: &[SupportItem],
    max_labels_per_item: usize,
) -> Result<LcClassSet, EngineError> {
    if support.is_empty() {
        return Err(EngineError::EmptySupport);
    }
    for item in support {
        let count = item.labels.len();
        if count > max_labels_per_item {
            return Err(EngineError::LabelCapExceeded {
                item_id: item.id.clone(),
                count,
                cap: max_labels_per_item,
            });
        }
        if count == 0 {
            return Err(EngineError::EmptyLabelSet {
                item_id: item.id.clone(),
            });
        }
    }

    let mut members: HashMap<LabelSet, Vec<u32>> = HashMap::new();
    for (idx, item) in support.iter().enumerate() {
        let ids = item.labels.to_vec();
        let subsets: u64 = 1 << ids.len();
        for mask in 1..subsets {
            let mut class = LabelSet::empty();
            let mut bits = mask;
            while bits != 0 {
                class.insert(ids[bits.trailing_zeros() as usize]);
                bits &= bits - 1;
            }
            members.entry(class).or_default().push(idx as u32);
        }
    }

    let mut pairs: Vec<(LabelSet, Vec<u32>)> = members.into_iter().collect();
    pairs.sort_unstable_by_key(|p| p.0);
    let (classes, extents) = pairs
        .into_iter()
        .map(|(class, idx)| (class, Extent(idx)))
        .unzip();
    Ok(LcClassSet { classes, extents })
}

/// Indices of the support items whose labels contain `lc_class`.
pub fn extent_of(lc_class: &LabelSet, support: &[SupportItem]) -> Result<Extent, EngineError> {
    if lc_class.is_empty() {
        return Err(EngineError::EmptyClass);
    }
    let indices: Vec<u32> = support
        .iter()
        .enumerate()
        .filter(|(_, item)| lc_class.is_subset_of(&item.labels))
        .map(|(i, _)| i as u32)
        .collect();
    if indices.is_empty() {
        return Err(EngineError::ClassNotInL);
    }
    Ok(Extent(indices))
}
