//! Multi-label evaluation metrics.
//!
//! Label-set metrics (macro/micro F1) score discrete predictions; ranking
//! metrics (ROC-AUC, mAP) score continuous outputs. Macro averages skip
//! labels that cannot be scored and report which ones were skipped.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::LabelSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no items to score")]
    EmptyInput,
    #[error("no label has both positive and negative items")]
    NoValidLabels,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite score at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("label id {0} outside the {1}-label vocabulary")]
    LabelOutOfRange(usize, usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    /// `2tp / (2tp + fp + fn)`, zero when the denominator is zero.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub per_label: Vec<Counts>,
    pub total: Counts,
}

impl ConfusionCounts {
    pub fn from_predictions(
        pairs: &[(LabelSet, LabelSet)],
        num_labels: usize,
    ) -> Result<Self, MetricsError> {
        let mut per_label = vec![Counts::default(); num_labels];
        for (predicted, truth) in pairs {
            for set in [predicted, truth] {
                if set.bound() > num_labels {
                    return Err(MetricsError::LabelOutOfRange(set.bound() - 1, num_labels));
                }
            }
            for l in predicted.iter() {
                if truth.contains(l) {
                    per_label[l].tp += 1;
                } else {
                    per_label[l].fp += 1;
                }
            }
            for l in truth.iter().filter(|&l| !predicted.contains(l)) {
                per_label[l].fn_ += 1;
            }
        }
        let total = per_label.iter().fold(Counts::default(), |acc, c| Counts {
            tp: acc.tp + c.tp,
            fp: acc.fp + c.fp,
            fn_: acc.fn_ + c.fn_,
        });
        Ok(Self { per_label, total })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct F1Report {
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub per_label: Vec<f64>,
    pub counts: ConfusionCounts,
    /// Labels with no positive in the truth, left out of the macro mean.
    pub skipped: Vec<usize>,
}

/// Macro and micro F1 over `(predicted, truth)` pairs.
pub fn f1_scores(pairs: &[(LabelSet, LabelSet)], num_labels: usize) -> Result<F1Report, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let counts = ConfusionCounts::from_predictions(pairs, num_labels)?;
    let per_label: Vec<f64> = counts.per_label.iter().map(Counts::f1).collect();
    let mut skipped = Vec::new();
    let mut sum = 0.0;
    let mut n = 0usize;
    for (label, c) in counts.per_label.iter().enumerate() {
        if c.tp + c.fn_ == 0 {
            skipped.push(label);
        } else {
            sum += per_label[label];
            n += 1;
        }
    }
    Ok(F1Report {
        macro_f1: if n == 0 { 0.0 } else { sum / n as f64 },
        micro_f1: counts.total.f1(),
        per_label,
        counts,
        skipped,
    })
}

/// Row-major item-by-label scores with a parallel truth matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    scores: Vec<f64>,
    truth: Vec<bool>,
}

impl ScoreMatrix {
    pub fn new(rows: usize, cols: usize, scores: Vec<f64>, truth: Vec<bool>) -> Result<Self, MetricsError> {
        if scores.len() != rows * cols || truth.len() != rows * cols {
            return Err(MetricsError::Shape(format!(
                "{rows}x{cols} needs {} entries, got {} scores and {} truths",
                rows * cols,
                scores.len(),
                truth.len()
            )));
        }
        if let Some(pos) = scores.iter().position(|s| !s.is_finite()) {
            return Err(MetricsError::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, scores, truth })
    }

    /// Builds truth from label sets; `scores` has one row per item.
    pub fn from_rows(scores: &[Vec<f64>], truth: &[LabelSet], cols: usize) -> Result<Self, MetricsError> {
        if scores.len() != truth.len() {
            return Err(MetricsError::Shape(format!(
                "{} score rows for {} truth rows",
                scores.len(),
                truth.len()
            )));
        }
        let mut flat = Vec::with_capacity(scores.len() * cols);
        let mut flags = Vec::with_capacity(scores.len() * cols);
        for (row, labels) in scores.iter().zip(truth) {
            if row.len() != cols {
                return Err(MetricsError::Shape(format!("row of {} scores, expected {cols}", row.len())));
            }
            if labels.bound() > cols {
                return Err(MetricsError::LabelOutOfRange(labels.bound() - 1, cols));
            }
            flat.extend_from_slice(row);
            flags.extend((0..cols).map(|l| labels.contains(l)));
        }
        Self::new(scores.len(), cols, flat, flags)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn score(&self, row: usize, col: usize) -> f64 {
        self.scores[row * self.cols + col]
    }

    pub fn is_positive(&self, row: usize, col: usize) -> bool {
        self.truth[row * self.cols + col]
    }

    fn column(&self, col: usize) -> (Vec<f64>, Vec<bool>) {
        (0..self.rows)
            .map(|r| (self.score(r, col), self.is_positive(r, col)))
            .unzip()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    /// Mean over labels that could be scored.
    pub mean: f64,
    /// `None` for skipped labels.
    pub per_label: Vec<Option<f64>>,
    pub skipped: Vec<usize>,
}

fn macro_over_labels(
    matrix: &ScoreMatrix,
    needs_negative: bool,
    score: impl Fn(&[f64], &[bool]) -> f64,
) -> Result<RankingReport, MetricsError> {
    if matrix.rows == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let mut per_label = Vec::with_capacity(matrix.cols);
    let mut skipped = Vec::new();
    for col in 0..matrix.cols {
        let (scores, truth) = matrix.column(col);
        let positives = truth.iter().filter(|&&t| t).count();
        let negatives = truth.len() - positives;
        if positives == 0 || (needs_negative && negatives == 0) {
            skipped.push(col);
            per_label.push(None);
        } else {
            per_label.push(Some(score(&scores, &truth)));
        }
    }
    let valid: Vec<f64> = per_label.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(MetricsError::NoValidLabels);
    }
    Ok(RankingReport {
        mean: valid.iter().sum::<f64>() / valid.len() as f64,
        per_label,
        skipped,
    })
}

/// Mann-Whitney AUC with midranks for ties.
fn auc_by_ranks(scores: &[f64], truth: &[bool]) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut positive_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share their average
        let midrank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if truth[idx] {
                positive_rank_sum += midrank;
            }
        }
        i = j + 1;
    }
    let p = truth.iter().filter(|&&t| t).count() as f64;
    let n = truth.len() as f64 - p;
    (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n)
}

/// Macro ROC-AUC over labels having both classes present.
pub fn roc_auc(matrix: &ScoreMatrix) -> Result<RankingReport, MetricsError> {
    macro_over_labels(matrix, true, auc_by_ranks)
}

/// Precision at each positive, scores descending, ties by item index.
fn average_precision(scores: &[f64], truth: &[bool]) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &idx) in order.iter().enumerate() {
        if truth[idx] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    sum / hits as f64
}

/// Mean average precision over labels with at least one positive.
pub fn mean_average_precision(matrix: &ScoreMatrix) -> Result<RankingReport, MetricsError> {
    macro_over_labels(matrix, false, average_precision)
}

/// Serializable metric summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub metric: String,
    pub value: f64,
    pub per_label: Vec<Option<f64>>,
    pub skipped_labels: Vec<String>,
}

impl MetricRecord {
    pub fn from_ranking(metric: &str, report: &RankingReport, names: &[String]) -> Self {
        Self {
            metric: metric.to_owned(),
            value: report.mean,
            per_label: report.per_label.clone(),
            skipped_labels: report.skipped.iter().map(|&l| names[l].clone()).collect(),
        }
    }

    pub fn from_f1(report: &F1Report, names: &[String]) -> [Self; 2] {
        let per_label: Vec<Option<f64>> = report
            .per_label
            .iter()
            .enumerate()
            .map(|(l, &f)| (!report.skipped.contains(&l)).then_some(f))
            .collect();
        let skipped: Vec<String> = report.skipped.iter().map(|&l| names[l].clone()).collect();
        [
            Self {
                metric: "macro_f1".into(),
                value: report.macro_f1,
                per_label: per_label.clone(),
                skipped_labels: skipped.clone(),
            },
            Self {
                metric: "micro_f1".into(),
                value: report.micro_f1,
                per_label,
                skipped_labels: skipped,
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ls(ids: &[usize]) -> LabelSet {
        ids.iter().copied().collect()
    }

    fn column(scores: &[f64], truth: &[bool]) -> ScoreMatrix {
        ScoreMatrix::new(scores.len(), 1, scores.to_vec(), truth.to_vec()).unwrap()
    }

    #[test]
    fn perfect_predictions() {
        let pairs = vec![(ls(&[0, 1]), ls(&[0, 1])), (ls(&[2]), ls(&[2]))];
        let r = f1_scores(&pairs, 3).unwrap();
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.micro_f1, 1.0);
    }

    #[test]
    fn total_miss() {
        let pairs = vec![(ls(&[1]), ls(&[0])), (ls(&[0]), ls(&[1]))];
        let r = f1_scores(&pairs, 2).unwrap();
        assert_eq!(r.macro_f1, 0.0);
        assert_eq!(r.micro_f1, 0.0);
    }

    #[test]
    fn hand_counted_example() {
        let (a, b) = (0, 1);
        let pairs = vec![
            (ls(&[a]), ls(&[a, b])),
            (ls(&[a, b]), ls(&[a])),
            (ls(&[b]), ls(&[b])),
        ];
        let r = f1_scores(&pairs, 2).unwrap();
        // A is predicted exactly where it is true; B has one hit, one
        // spurious and one missed prediction.
        assert_eq!(r.counts.per_label[a], Counts { tp: 2, fp: 0, fn_: 0 });
        assert_eq!(r.counts.per_label[b], Counts { tp: 1, fp: 1, fn_: 1 });
        assert_eq!(r.per_label[a], 1.0);
        assert_eq!(r.per_label[b], 0.5);
        assert_eq!(r.macro_f1, 0.75);
        // tp 3, fp 1, fn 1
        assert_eq!(r.micro_f1, 0.75);
    }

    #[test]
    fn labels_without_positives_are_skipped() {
        let pairs = vec![(ls(&[0, 2]), ls(&[0]))];
        let r = f1_scores(&pairs, 3).unwrap();
        assert_eq!(r.skipped, vec![1, 2]);
        assert_eq!(r.macro_f1, 1.0);
        assert!((r.micro_f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn f1_errors() {
        assert_eq!(f1_scores(&[], 2), Err(MetricsError::EmptyInput));
        assert_eq!(
            f1_scores(&[(ls(&[4]), ls(&[0]))], 2),
            Err(MetricsError::LabelOutOfRange(4, 2))
        );
    }

    #[test]
    fn auc_reference_cases() {
        let perfect = column(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]);
        assert_eq!(roc_auc(&perfect).unwrap().mean, 1.0);
        let flat = column(&[0.3; 4], &[true, false, true, false]);
        assert_eq!(roc_auc(&flat).unwrap().mean, 0.5);
        let worked = column(&[0.9, 0.4, 0.6], &[true, false, true]);
        assert_eq!(roc_auc(&worked).unwrap().mean, 1.0);
    }

    #[test]
    fn auc_skips_degenerate_labels() {
        let m = ScoreMatrix::new(
            3,
            2,
            vec![0.1, 0.5, 0.2, 0.6, 0.3, 0.7],
            vec![true, true, false, true, true, true],
        )
        .unwrap();
        let r = roc_auc(&m).unwrap();
        assert_eq!(r.skipped, vec![1]);
        assert_eq!(r.per_label[1], None);
        let none = column(&[0.1, 0.2], &[true, true]);
        assert_eq!(roc_auc(&none), Err(MetricsError::NoValidLabels));
    }

    #[test]
    fn ap_reference_cases() {
        let first = column(&[0.9, 0.5, 0.4, 0.3, 0.2], &[true, false, false, false, false]);
        assert_eq!(mean_average_precision(&first).unwrap().mean, 1.0);
        let last = column(&[0.9, 0.5, 0.4, 0.3], &[false, false, false, true]);
        assert_eq!(mean_average_precision(&last).unwrap().mean, 0.25);
        let worked = column(&[0.9, 0.8, 0.7, 0.1], &[true, false, true, false]);
        assert!((mean_average_precision(&worked).unwrap().mean - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn ap_ties_follow_item_index() {
        // Tied scores: item 0 (negative) ranks before item 1 (positive).
        let m = column(&[0.5, 0.5], &[false, true]);
        assert_eq!(mean_average_precision(&m).unwrap().mean, 0.5);
    }

    #[test]
    fn score_matrix_validation() {
        assert!(matches!(ScoreMatrix::new(2, 2, vec![0.0; 3], vec![false; 4]), Err(MetricsError::Shape(_))));
        assert_eq!(
            ScoreMatrix::new(1, 2, vec![0.0, f64::NAN], vec![false; 2]),
            Err(MetricsError::NonFinite { row: 0, col: 1 })
        );
    }

    proptest! {
        #[test]
        fn micro_invariant_to_label_permutation(
            rows in proptest::collection::vec(
                (proptest::collection::btree_set(0usize..6, 0..4), proptest::collection::btree_set(0usize..6, 1..4)),
                1..30),
            shift in 1usize..6,
        ) {
            let pairs: Vec<(LabelSet, LabelSet)> = rows.iter()
                .map(|(p, t)| (p.iter().copied().collect(), t.iter().copied().collect()))
                .collect();
            let permuted: Vec<(LabelSet, LabelSet)> = rows.iter()
                .map(|(p, t)| (p.iter().map(|l| (l + shift) % 6).collect(), t.iter().map(|l| (l + shift) % 6).collect()))
                .collect();
            let a = f1_scores(&pairs, 6).unwrap();
            let b = f1_scores(&permuted, 6).unwrap();
            prop_assert_eq!(a.micro_f1, b.micro_f1);
            let mut reversed = pairs.clone();
            reversed.reverse();
            prop_assert_eq!(f1_scores(&reversed, 6).unwrap().macro_f1, a.macro_f1);
            prop_assert!((0.0..=1.0).contains(&a.macro_f1) && (0.0..=1.0).contains(&a.micro_f1));
        }

        #[test]
        fn auc_invariant_to_monotone_transform(
            col in proptest::collection::vec((-5.0f64..5.0, any::<bool>()), 2..60),
        ) {
            let scores: Vec<f64> = col.iter().map(|c| c.0).collect();
            let truth: Vec<bool> = col.iter().map(|c| c.1).collect();
            prop_assume!(truth.iter().any(|&t| t) && truth.iter().any(|&t| !t));
            let base = roc_auc(&column(&scores, &truth)).unwrap().mean;
            let moved: Vec<f64> = scores.iter().map(|s| 3.0 * s.exp() + 1.0).collect();
            let after = roc_auc(&column(&moved, &truth)).unwrap().mean;
            prop_assert!((base - after).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&base));
        }
    }
}
