//! Shallow MLP probe trained on frozen embeddings.
//!
//! One ReLU hidden layer (512 units by default) feeds a sigmoid output per
//! label; training minimizes mean binary cross-entropy with Adam. The hidden
//! activations double as a learned feature space for few-shot evaluation.

mod adam;
mod train;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand_distr::{Distribution, Uniform};
use thiserror::Error;

use crate::labels::LabelSet;
use crate::model::EmbeddingVector;
use crate::rng::seeded;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use train::{train_probe, EpochStats, TrainConfig, TrainedProbe};

/// Width of the hidden layer.
pub const HIDDEN_UNITS: usize = 512;

/// Scores are clamped to `[SCORE_CLAMP, 1 - SCORE_CLAMP]` inside the loss.
pub const SCORE_CLAMP: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("parameters contain non-finite values")]
    NonFinite,
}

/// Weights of the probe. `w1` is `hidden x input`, `w2` is `labels x hidden`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeParams {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

impl ProbeParams {
    pub fn new(
        w1: Array2<f64>,
        b1: Array1<f64>,
        w2: Array2<f64>,
        b2: Array1<f64>,
    ) -> Result<Self, ProbeError> {
        let hidden = w1.nrows();
        if b1.len() != hidden {
            return Err(ProbeError::DimensionMismatch { expected: hidden, found: b1.len() });
        }
        if w2.ncols() != hidden {
            return Err(ProbeError::DimensionMismatch { expected: hidden, found: w2.ncols() });
        }
        if b2.len() != w2.nrows() {
            return Err(ProbeError::DimensionMismatch { expected: w2.nrows(), found: b2.len() });
        }
        let params = Self {
            w1: w1.as_standard_layout().into_owned(),
            b1,
            w2: w2.as_standard_layout().into_owned(),
            b2,
        };
        if params.tensors().iter().any(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(ProbeError::NonFinite);
        }
        Ok(params)
    }

    pub fn zeros(input_dim: usize, hidden: usize, num_labels: usize) -> Self {
        Self {
            w1: Array2::zeros((hidden, input_dim)),
            b1: Array1::zeros(hidden),
            w2: Array2::zeros((num_labels, hidden)),
            b2: Array1::zeros(num_labels),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(input_dim: usize, hidden: usize, num_labels: usize, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let mut glorot = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
            Array2::from_shape_simple_fn((rows, cols), || dist.sample(&mut rng))
        };
        let w1 = glorot(hidden, input_dim);
        let w2 = glorot(num_labels, hidden);
        Self {
            w1,
            b1: Array1::zeros(hidden),
            w2,
            b2: Array1::zeros(num_labels),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn num_labels(&self) -> usize {
        self.w2.nrows()
    }

    /// Tensors in the order `w1, b1, w2, b2`, each flattened row-major.
    pub fn tensors(&self) -> [&[f64]; 4] {
        [
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.w2.as_slice().expect("standard layout"),
            self.b2.as_slice().expect("standard layout"),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
        ]
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim(), self.hidden_dim(), self.num_labels())
    }
}

/// Inputs and 0/1 targets, one row per item.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeDataset {
    inputs: Array2<f64>,
    targets: Array2<f64>,
}

impl ProbeDataset {
    pub fn new(inputs: Array2<f64>, targets: Array2<f64>) -> Result<Self, ProbeError> {
        if inputs.nrows() != targets.nrows() {
            return Err(ProbeError::DimensionMismatch {
                expected: inputs.nrows(),
                found: targets.nrows(),
            });
        }
        Ok(Self { inputs, targets })
    }

    pub fn from_items<'a, I>(items: I, num_labels: usize) -> Result<Self, ProbeError>
    where
        I: IntoIterator<Item = (&'a EmbeddingVector, &'a LabelSet)>,
    {
        let items: Vec<_> = items.into_iter().collect();
        let dim = items.first().map_or(0, |(e, _)| e.dim());
        let mut inputs = Array2::zeros((items.len(), dim));
        let mut targets = Array2::zeros((items.len(), num_labels));
        for (row, (e, labels)) in items.iter().enumerate() {
            if e.dim() != dim {
                return Err(ProbeError::DimensionMismatch { expected: dim, found: e.dim() });
            }
            for (c, &v) in e.as_slice().iter().enumerate() {
                inputs[(row, c)] = f64::from(v);
            }
            for l in labels.iter() {
                if l >= num_labels {
                    return Err(ProbeError::DimensionMismatch { expected: num_labels, found: l + 1 });
                }
                targets[(row, l)] = 1.0;
            }
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }

    pub fn inputs(&self) -> ArrayView2<'_, f64> {
        self.inputs.view()
    }

    pub fn targets(&self) -> ArrayView2<'_, f64> {
        self.targets.view()
    }

    pub(crate) fn rows(&self, idx: &[usize]) -> (Array2<f64>, Array2<f64>) {
        (self.inputs.select(Axis(0), idx), self.targets.select(Axis(0), idx))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutput {
    pub scores: Vec<f64>,
    pub hidden: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

struct Activations {
    pre_hidden: Array2<f64>,
    hidden: Array2<f64>,
    scores: Array2<f64>,
}

fn check_input(params: &ProbeParams, dim: usize) -> Result<(), ProbeError> {
    if dim != params.input_dim() {
        return Err(ProbeError::DimensionMismatch {
            expected: params.input_dim(),
            found: dim,
        });
    }
    Ok(())
}

fn forward_batch(inputs: ArrayView2<'_, f64>, params: &ProbeParams) -> Activations {
    let pre_hidden = inputs.dot(&params.w1.t()) + &params.b1;
    let hidden = pre_hidden.mapv(|v| v.max(0.0));
    let scores = (hidden.dot(&params.w2.t()) + &params.b2).mapv(sigmoid);
    Activations {
        pre_hidden,
        hidden,
        scores,
    }
}

/// Hidden activations and per-label scores for one input.
pub fn probe_forward(x: &EmbeddingVector, params: &ProbeParams) -> Result<ProbeOutput, ProbeError> {
    check_input(params, x.dim())?;
    let input = Array2::from_shape_fn((1, x.dim()), |(_, c)| f64::from(x.as_slice()[c]));
    let act = forward_batch(input.view(), params);
    Ok(ProbeOutput {
        scores: act.scores.row(0).to_vec(),
        hidden: act.hidden.row(0).to_vec(),
    })
}

/// Hidden-layer representation of `x`.
pub fn extract_probe_features(
    x: &EmbeddingVector,
    params: &ProbeParams,
) -> Result<Vec<f64>, ProbeError> {
    probe_forward(x, params).map(|out| out.hidden)
}

/// Scores for a batch of inputs, one row per item.
pub fn probe_scores(inputs: ArrayView2<'_, f64>, params: &ProbeParams) -> Result<Array2<f64>, ProbeError> {
    check_input(params, inputs.ncols())?;
    Ok(forward_batch(inputs, params).scores)
}

fn bce_term(score: f64, target: f64) -> f64 {
    let s = score.clamp(SCORE_CLAMP, 1.0 - SCORE_CLAMP);
    -(target * s.ln() + (1.0 - target) * (1.0 - s).ln())
}

/// Mean binary cross-entropy over labels.
pub fn bce_loss(scores: &[f64], targets: &[f64]) -> f64 {
    let n = scores.len().min(targets.len());
    if n == 0 {
        return 0.0;
    }
    scores
        .iter()
        .zip(targets)
        .map(|(&s, &t)| bce_term(s, t))
        .sum::<f64>()
        / n as f64
}

/// Mean binary cross-entropy over every item and label of a batch.
pub fn batch_loss(
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    params: &ProbeParams,
) -> Result<f64, ProbeError> {
    let scores = probe_scores(inputs, params)?;
    check_targets(params, &targets, inputs.nrows())?;
    Ok(mean_bce(&scores, &targets))
}

fn mean_bce(scores: &Array2<f64>, targets: &ArrayView2<'_, f64>) -> f64 {
    let n = scores.len();
    if n == 0 {
        return 0.0;
    }
    scores
        .iter()
        .zip(targets.iter())
        .map(|(&s, &t)| bce_term(s, t))
        .sum::<f64>()
        / n as f64
}

fn check_targets(params: &ProbeParams, targets: &ArrayView2<'_, f64>, rows: usize) -> Result<(), ProbeError> {
    if targets.ncols() != params.num_labels() {
        return Err(ProbeError::DimensionMismatch {
            expected: params.num_labels(),
            found: targets.ncols(),
        });
    }
    if targets.nrows() != rows {
        return Err(ProbeError::DimensionMismatch { expected: rows, found: targets.nrows() });
    }
    Ok(())
}

pub(crate) fn loss_and_gradient(
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    params: &ProbeParams,
) -> Result<(f64, ProbeParams), ProbeError> {
    if inputs.nrows() == 0 {
        return Err(ProbeError::EmptyDataset);
    }
    check_input(params, inputs.ncols())?;
    check_targets(params, &targets, inputs.nrows())?;

    let act = forward_batch(inputs, params);
    let loss = mean_bce(&act.scores, &targets);

    // d(mean BCE)/d(logit) = (s - t) / (batch * labels)
    let scale = 1.0 / (inputs.nrows() * params.num_labels()) as f64;
    let d_logits = (&act.scores - &targets) * scale;
    let mut grads = params.zeros_like();
    grads.w2 = d_logits.t().dot(&act.hidden);
    grads.b2 = d_logits.sum_axis(Axis(0));
    let mut d_hidden = d_logits.dot(&params.w2);
    d_hidden.zip_mut_with(&act.pre_hidden, |d, &z| {
        if z <= 0.0 {
            *d = 0.0;
        }
    });
    grads.w1 = d_hidden.t().dot(&inputs);
    grads.b1 = d_hidden.sum_axis(Axis(0));
    grads.w1 = grads.w1.as_standard_layout().into_owned();
    grads.w2 = grads.w2.as_standard_layout().into_owned();
    Ok((loss, grads))
}

/// Analytic gradient of the mean batch cross-entropy.
pub fn probe_gradient(
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    params: &ProbeParams,
) -> Result<ProbeParams, ProbeError> {
    loss_and_gradient(inputs, targets, params).map(|(_, g)| g)
}
