use rand::seq::SliceRandom;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::{batch_loss, loss_and_gradient, ProbeDataset, ProbeError, ProbeParams, HIDDEN_UNITS};
use crate::rng::{derive, seeded};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub hidden_units: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 16,
            patience: 10,
            max_epochs: 200,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            hidden_units: HIDDEN_UNITS,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ProbeError> {
        let bad = |what: &str| Err(ProbeError::InvalidConfig(format!("{what} must be positive")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate");
        }
        if self.batch_size == 0 {
            return bad("batch_size");
        }
        if self.patience == 0 {
            return bad("patience");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs");
        }
        if self.hidden_units == 0 {
            return bad("hidden_units");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(ProbeError::InvalidConfig("betas must lie in (0, 1)".into()));
        }
        if self.epsilon <= 0.0 {
            return bad("epsilon");
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedProbe {
    /// Parameters from the epoch with the lowest validation loss.
    pub params: ProbeParams,
    pub best_epoch: usize,
    pub history: Vec<EpochStats>,
}

/// Minibatch Adam on mean BCE with early stopping on validation loss.
pub fn train_probe(
    train: &ProbeDataset,
    valid: &ProbeDataset,
    config: &TrainConfig,
) -> Result<TrainedProbe, ProbeError> {
    config.validate()?;
    if train.is_empty() || valid.is_empty() {
        return Err(ProbeError::EmptyDataset);
    }
    let dim = train.inputs().ncols();
    if valid.inputs().ncols() != dim {
        return Err(ProbeError::DimensionMismatch { expected: dim, found: valid.inputs().ncols() });
    }
    let labels = train.targets().ncols();
    if valid.targets().ncols() != labels {
        return Err(ProbeError::DimensionMismatch { expected: labels, found: valid.targets().ncols() });
    }

    let mut params = ProbeParams::init(dim, config.hidden_units, labels, derive(config.seed, 1));
    let mut state = AdamState::new(&params);
    let adam = config.adam();
    let mut rng = seeded(derive(config.seed, 2));
    let mut order: Vec<usize> = (0..train.len()).collect();

    let mut best = (f64::INFINITY, 0usize, params.clone());
    let mut history = Vec::new();
    let mut stale = 0;
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let (x, t) = train.rows(chunk);
            let (loss, grads) = loss_and_gradient(x.view(), t.view(), &params)?;
            loss_sum += loss * chunk.len() as f64;
            adam_step(&mut params, &grads, &mut state, &adam);
        }
        let valid_loss = batch_loss(valid.inputs(), valid.targets(), &params)?;
        history.push(EpochStats {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            valid_loss,
        });
        if valid_loss < best.0 {
            best = (valid_loss, epoch, params.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }

    Ok(TrainedProbe {
        params: best.2,
        best_epoch: best.1,
        history,
    })
}
