use std::time::Instant;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{adam_step, backward, init_head, AdamState, HeadConfig, HeadParams};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Optimizer and schedule settings. Defaults: 15 epochs, batch 128,
/// constant learning rate 3e-4, Adam (0.9, 0.999, 1e-8), reshuffle every
/// epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub shuffle_each_epoch: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 15,
            batch_size: 128,
            learning_rate: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            shuffle_each_epoch: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0
            || self.batch_size == 0
            || self.learning_rate.is_nan()
            || self.learning_rate <= 0.0
        {
            return Err(Error::invalid(format!(
                "need epochs >= 1, batch_size >= 1, learning_rate > 0 (got {}, {}, {})",
                self.epochs, self.batch_size, self.learning_rate
            )));
        }
        Ok(())
    }

    pub fn steps_per_epoch(&self, n: usize) -> usize {
        n.div_ceil(self.batch_size)
    }
}

/// Feature rows (stored as f32) with their class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub features: Array2<f32>,
    pub labels: Vec<usize>,
}

impl LabeledSet {
    pub fn new(features: Array2<f32>, labels: Vec<usize>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Rows at `indices` widened to f64, with their labels.
    pub fn gather(&self, indices: &[usize]) -> (Array2<f64>, Vec<usize>) {
        let mut batch = Array2::zeros((indices.len(), self.dim()));
        for (mut row, &i) in batch.axis_iter_mut(Axis(0)).zip(indices) {
            row.zip_mut_with(&self.features.row(i), |o, &v| *o = v as f64);
        }
        (batch, indices.iter().map(|&i| self.labels[i]).collect())
    }

    pub fn as_f64(&self) -> Array2<f64> {
        self.features.mapv(f64::from)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Sample-weighted mean of the mini-batch losses seen during the epoch.
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    pub seconds: f64,
    /// Optimizer steps taken in this epoch.
    pub steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn total_steps(&self) -> usize {
        self.epochs.iter().map(|e| e.steps).sum()
    }
}

/// Loss and accuracy over a whole set, evaluated in chunks.
pub fn evaluate(params: &HeadParams, set: &LabeledSet) -> Result<(f64, f64)> {
    const CHUNK: usize = 1024;
    let mut loss_sum = 0.0;
    let mut correct = 0;
    let indices: Vec<usize> = (0..set.len()).collect();
    for chunk in indices.chunks(CHUNK) {
        let (batch, labels) = set.gather(chunk);
        let probs = super::forward(params, batch.view())?;
        loss_sum += super::cross_entropy(&probs, &labels)? * chunk.len() as f64;
        correct += probs
            .axis_iter(Axis(0))
            .zip(&labels)
            .filter(|(row, &l)| super::forward::argmax(row.iter().copied()) == l)
            .count();
    }
    let n = set.len() as f64;
    Ok((loss_sum / n, correct as f64 / n))
}

/// Train a freshly initialized head; see [`train_with`].
pub fn train(
    train_set: &LabeledSet,
    val_set: &LabeledSet,
    head_cfg: &HeadConfig,
    train_cfg: &TrainConfig,
) -> Result<(HeadParams, TrainHistory)> {
    train_with(train_set, val_set, head_cfg, train_cfg, |_, _| Ok(()))
}

/// Mini-batch Adam training.
///
/// Every epoch reshuffles (if enabled) with a generator seeded from
/// `train_cfg.seed`, runs `ceil(N / batch_size)` steps keeping the last
/// partial batch, then evaluates the validation set once. `on_epoch` sees
/// each record together with the parameters at the end of that epoch. The
/// returned parameters are those of the final epoch.
pub fn train_with<F>(
    train_set: &LabeledSet,
    val_set: &LabeledSet,
    head_cfg: &HeadConfig,
    train_cfg: &TrainConfig,
    mut on_epoch: F,
) -> Result<(HeadParams, TrainHistory)>
where
    F: FnMut(&EpochRecord, &HeadParams) -> Result<()>,
{
    train_cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::invalid(format!(
            "training needs non-empty splits (train {}, val {})",
            train_set.len(),
            val_set.len()
        )));
    }
    for (name, set) in [("train", train_set), ("val", val_set)] {
        if set.dim() != head_cfg.input_dim {
            return Err(Error::invalid(format!(
                "{name} features have width {}, head expects {}",
                set.dim(),
                head_cfg.input_dim
            )));
        }
        if let Some(&bad) = set.labels.iter().find(|&&l| l >= head_cfg.n_classes) {
            return Err(Error::invalid(format!("{name} label {bad} out of range")));
        }
    }
    let mut seen = vec![false; head_cfg.n_classes];
    train_set.labels.iter().for_each(|&l| seen[l] = true);
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::invalid(format!(
            "class {missing} has no training samples"
        )));
    }

    let mut params = init_head(head_cfg)?;
    let mut state = AdamState::new(&params);
    let mut rng = SplitMix64::derive(train_cfg.seed, 0x5348_5546);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = TrainHistory::default();
    let mut t = 0u64;

    for epoch in 1..=train_cfg.epochs {
        let started = Instant::now();
        if train_cfg.shuffle_each_epoch {
            rng.shuffle(&mut order);
        }
        let (mut loss_sum, mut correct, mut steps) = (0.0, 0usize, 0usize);
        for chunk in order.chunks(train_cfg.batch_size) {
            let (batch, labels) = train_set.gather(chunk);
            let grads = backward(&params, batch.view(), &labels)?;
            t += 1;
            adam_step(&mut state, &mut params, &grads, t, train_cfg);
            loss_sum += grads.loss * chunk.len() as f64;
            correct += grads.correct;
            steps += 1;
        }
        if !params.is_finite() {
            return Err(Error::invalid(format!(
                "parameters diverged to non-finite values in epoch {epoch}"
            )));
        }
        let (val_loss, val_acc) = evaluate(&params, val_set)?;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            train_acc: correct as f64 / train_set.len() as f64,
            val_loss,
            val_acc,
            seconds: started.elapsed().as_secs_f64(),
            steps,
        };
        on_epoch(&record, &params)?;
        history.epochs.push(record);
    }
    Ok((params, history))
}
