use std::collections::HashMap;

use super::classes::{enumerate_lc_classes, Extent};
use super::EngineError;
use crate::labels::LabelSet;
use crate::model::{EmbeddingVector, SupportItem};

/// One LC-class with its own prototype, as in the unoptimized method.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPrototype {
    pub class: LabelSet,
    pub extent: Extent,
    pub vector: EmbeddingVector,
}

/// A prototype shared by every LC-class with the same extent.
#[derive(Debug, Clone, PartialEq)]
pub struct UniquePrototype {
    extent: Extent,
    vector: EmbeddingVector,
    classes: Vec<LabelSet>,
    best_class: LabelSet,
}

impl UniquePrototype {
    pub fn extent(&self) -> &Extent {
        &self.extent
    }

    pub fn vector(&self) -> &EmbeddingVector {
        &self.vector
    }

    /// Classes sharing this prototype, in ascending class order.
    pub fn classes(&self) -> &[LabelSet] {
        &self.classes
    }

    /// The class of maximal cardinality. It is unique within a group: the
    /// labels shared by every extent member.
    pub fn best_class(&self) -> &LabelSet {
        &self.best_class
    }
}

/// Deduplicated prototypes of one support set.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeIndex {
    prototypes: Vec<UniquePrototype>,
    total_classes: usize,
    dim: usize,
}

impl PrototypeIndex {
    pub fn prototypes(&self) -> &[UniquePrototype] {
        &self.prototypes
    }

    /// Number of unique prototypes, `M`.
    pub fn len(&self) -> usize {
        self.prototypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prototypes.is_empty()
    }

    /// Number of LC-classes, `|L|`.
    pub fn total_classes(&self) -> usize {
        self.total_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn support_dim(support: &[SupportItem]) -> Result<usize, EngineError> {
    let first = support.first().ok_or(EngineError::EmptySupport)?;
    let expected = first.embedding.dim();
    for item in support {
        let found = item.embedding.dim();
        if found != expected {
            return Err(EngineError::DimensionMismatch { expected, found });
        }
    }
    Ok(expected)
}

/// Mean of the extent members' embeddings.
///
/// Sums in ascending support index with an `f64` accumulator and divides
/// once, so equal extents always give bit-identical vectors.
pub fn mean_embedding(
    support: &[SupportItem],
    extent: &Extent,
) -> Result<EmbeddingVector, EngineError> {
    let dim = support_dim(support)?;
    if extent.is_empty() {
        return Err(EngineError::ClassNotInL);
    }
    let mut acc = vec![0f64; dim];
    for &idx in extent.indices() {
        let item = support.get(idx as usize).ok_or(EngineError::ClassNotInL)?;
        for (a, &v) in acc.iter_mut().zip(item.embedding.as_slice()) {
            *a += f64::from(v);
        }
    }
    let count = extent.len() as f64;
    for a in &mut acc {
        *a /= count;
    }
    // Means of finite f32 values are finite.
    Ok(EmbeddingVector::from_f64(&acc).expect("mean of finite values"))
}

/// One prototype per LC-class; `|L|` entries.
pub fn build_prototypes_original(
    support: &[SupportItem],
    max_labels_per_item: usize,
) -> Result<Vec<ClassPrototype>, EngineError> {
    support_dim(support)?;
    let classes = enumerate_lc_classes(support, max_labels_per_item)?;
    classes
        .iter()
        .map(|(class, extent)| {
            Ok(ClassPrototype {
                class: *class,
                extent: extent.clone(),
                vector: mean_embedding(support, extent)?,
            })
        })
        .collect()
}

/// Groups LC-classes by extent and computes one prototype per group.
///
/// Prototypes are ordered by extent.
pub fn build_prototype_index(
    support: &[SupportItem],
    max_labels_per_item: usize,
) -> Result<PrototypeIndex, EngineError> {
    let dim = support_dim(support)?;
    let classes = enumerate_lc_classes(support, max_labels_per_item)?;

    let mut groups: HashMap<&Extent, Vec<LabelSet>> = HashMap::new();
    for (class, extent) in classes.iter() {
        groups.entry(extent).or_default().push(*class);
    }
    let mut groups: Vec<(&Extent, Vec<LabelSet>)> = groups.into_iter().collect();
    groups.sort_unstable_by(|a, b| a.0.cmp(b.0));

    let prototypes = groups
        .into_iter()
        .map(|(extent, group)| {
            // Groups inherit the ascending class order; should two classes tie
            // on cardinality the first has the smallest id tuple.
            let top = group.iter().map(LabelSet::len).max().unwrap_or(0);
            let best_class = *group
                .iter()
                .find(|c| c.len() == top)
                .expect("group is non-empty");
            Ok(UniquePrototype {
                extent: extent.clone(),
                vector: mean_embedding(support, extent)?,
                classes: group,
                best_class,
            })
        })
        .collect::<Result<Vec<_>, EngineError>>()?;

    Ok(PrototypeIndex {
        prototypes,
        total_classes: classes.len(),
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;

    fn ls(ids: &[usize]) -> LabelSet {
        ids.iter().copied().collect()
    }

    fn item(id: &str, labels: &[usize], e: &[f32]) -> SupportItem {
        SupportItem::new(id, EmbeddingVector::new(e.to_vec()).unwrap(), ls(labels))
    }

    fn two_items() -> Vec<SupportItem> {
        vec![
            item("s0", &[A, B, C], &[1.0, 0.0]),
            item("s1", &[B, C], &[0.0, 1.0]),
        ]
    }

    #[test]
    fn single_item_prototype_is_its_embedding() {
        let s = vec![item("s0", &[A], &[0.25, -3.0])];
        let protos = build_prototypes_original(&s, 20).unwrap();
        assert_eq!(protos.len(), 1);
        assert_eq!(protos[0].class, ls(&[A]));
        assert_eq!(protos[0].vector, s[0].embedding);
    }

    #[test]
    fn original_prototypes_by_hand() {
        let protos = build_prototypes_original(&two_items(), 20).unwrap();
        assert_eq!(protos.len(), 7);
        let of = |c: LabelSet| protos.iter().find(|p| p.class == c).unwrap().vector.as_slice().to_vec();
        assert_eq!(of(ls(&[B])), vec![0.5, 0.5]);
        assert_eq!(of(ls(&[A, B])), vec![1.0, 0.0]);
    }

    #[test]
    fn identical_labels_average() {
        let s = vec![item("s0", &[A], &[1.0, 3.0]), item("s1", &[A], &[2.0, 5.0])];
        let protos = build_prototypes_original(&s, 20).unwrap();
        assert_eq!(protos.len(), 1);
        assert_eq!(protos[0].vector.as_slice(), &[1.5, 4.0]);
    }

    #[test]
    fn hand_grouping_of_two_items() {
        let index = build_prototype_index(&two_items(), 20).unwrap();
        assert_eq!(index.total_classes(), 7);
        assert_eq!(index.len(), 2);
        let p0 = &index.prototypes()[0];
        assert_eq!(p0.extent().indices(), &[0]);
        assert_eq!(p0.classes(), &[ls(&[A]), ls(&[A, B]), ls(&[A, C]), ls(&[A, B, C])]);
        assert_eq!(p0.best_class(), &ls(&[A, B, C]));
        assert_eq!(p0.vector().as_slice(), &[1.0, 0.0]);
        let p1 = &index.prototypes()[1];
        assert_eq!(p1.extent().indices(), &[0, 1]);
        assert_eq!(p1.classes(), &[ls(&[B]), ls(&[C]), ls(&[B, C])]);
        assert_eq!(p1.best_class(), &ls(&[B, C]));
        assert_eq!(p1.vector().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn shared_prototype_for_single_contributor() {
        // {A,B,C} alone contributes to both {A,B} and {B,C}.
        let s = vec![item("s0", &[A, B, C], &[1.0, 2.0]), item("s1", &[A], &[3.0, 1.0])];
        let index = build_prototype_index(&s, 20).unwrap();
        let holder = |c: LabelSet| {
            index
                .prototypes()
                .iter()
                .position(|p| p.classes().contains(&c))
                .unwrap()
        };
        assert_eq!(holder(ls(&[A, B])), holder(ls(&[B, C])));
    }

    #[test]
    fn disjoint_singletons_do_not_dedup() {
        let s: Vec<SupportItem> = (0..5)
            .map(|i| item(&format!("s{i}"), &[i], &[i as f32 + 1.0, 1.0]))
            .collect();
        let index = build_prototype_index(&s, 20).unwrap();
        assert_eq!(index.len(), 5);
        assert_eq!(index.total_classes(), 5);
    }

    #[test]
    fn mixed_dimensions_are_rejected() {
        let s = vec![item("s0", &[A], &[1.0]), item("s1", &[B], &[1.0, 2.0])];
        assert_eq!(
            build_prototype_index(&s, 20),
            Err(EngineError::DimensionMismatch { expected: 1, found: 2 })
        );
    }

    fn arb_support() -> impl Strategy<Value = Vec<SupportItem>> {
        proptest::collection::vec(
            (
                proptest::collection::btree_set(0usize..8, 1..4),
                proptest::collection::vec(-1.0f32..1.0, 3),
            ),
            1..12,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (labels, e))| {
                    SupportItem::new(
                        format!("s{i}"),
                        EmbeddingVector::new(e).unwrap(),
                        labels.into_iter().collect(),
                    )
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn groups_partition_the_classes(support in arb_support()) {
            let index = build_prototype_index(&support, 20).unwrap();
            let original = build_prototypes_original(&support, 20).unwrap();
            let total: usize = index.prototypes().iter().map(|p| p.classes().len()).sum();
            prop_assert_eq!(total, index.total_classes());
            prop_assert_eq!(total, original.len());
            let mut seen = HashSet::new();
            for p in index.prototypes() {
                for c in p.classes() {
                    prop_assert!(seen.insert(*c));
                }
            }
            let extents: HashSet<&Extent> = index.prototypes().iter().map(|p| p.extent()).collect();
            prop_assert_eq!(extents.len(), index.len());
            prop_assert!(index.len() <= index.total_classes());
            let distinct: HashSet<&Extent> = original.iter().map(|p| &p.extent).collect();
            prop_assert_eq!(index.len() == index.total_classes(), distinct.len() == original.len());
        }

        #[test]
        fn dedup_is_bit_identical(support in arb_support()) {
            let index = build_prototype_index(&support, 20).unwrap();
            let original = build_prototypes_original(&support, 20).unwrap();
            for p in index.prototypes() {
                for c in p.classes() {
                    let o = original.iter().find(|o| &o.class == c).unwrap();
                    let a: Vec<u32> = o.vector.as_slice().iter().map(|v| v.to_bits()).collect();
                    let b: Vec<u32> = p.vector().as_slice().iter().map(|v| v.to_bits()).collect();
                    prop_assert_eq!(a, b);
                }
                let top = p.classes().iter().map(LabelSet::len).max().unwrap();
                prop_assert_eq!(p.best_class().len(), top);
                prop_assert!(p.classes().contains(p.best_class()));
                // The largest class of a group is the labels common to its extent.
                let common = p.extent().indices().iter().fold(None, |acc: Option<LabelSet>, &i| {
                    let labels = support[i as usize].labels;
                    Some(acc.map_or(labels, |a| a.intersection(&labels)))
                }).unwrap();
                prop_assert_eq!(p.best_class(), &common);
            }
        }
    }
}
