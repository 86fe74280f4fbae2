//! Fully connected classifier head trained on frozen embeddings.
//!
//! Hidden layers are affine + ReLU; the output layer is affine + softmax.
//! All arithmetic is f64; checkpoints store f32.

mod adam;
mod backward;
mod forward;
mod train;

pub use adam::{adam_step, adam_update, AdamState};
pub use backward::{backward, Gradients};
pub(crate) use forward::argmax;
pub use forward::{cross_entropy, forward, logits, predict, softmax_rows, Prediction, PROB_FLOOR};
pub use train::{evaluate, train, train_with, EpochRecord, LabeledSet, TrainConfig, TrainHistory};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadConfig {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub n_classes: usize,
    pub seed: u64,
}

impl HeadConfig {
    pub fn new(input_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dims: vec![512],
            n_classes: crate::LabelSet::N_CLASSES,
            seed: 0,
        }
    }

    /// Layer widths from input to output.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim)
            .chain(self.hidden_dims.iter().copied())
            .chain(std::iter::once(self.n_classes))
            .collect()
    }
}

/// One affine layer: `y = x W^T + b`, `W` is `[out x in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    pub fn zeros(out: usize, inp: usize) -> Self {
        Self {
            weight: Array2::zeros((out, inp)),
            bias: Array1::zeros(out),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub layers: Vec<Layer>,
}

impl HeadParams {
    /// All-zero parameters with the shapes of `cfg`.
    pub fn zeros(cfg: &HeadConfig) -> Result<Self> {
        validate(cfg)?;
        let widths = cfg.widths();
        Ok(Self {
            layers: widths
                .windows(2)
                .map(|w| Layer::zeros(w[1], w[0]))
                .collect(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn n_classes(&self) -> usize {
        self.layers.last().map_or(0, Layer::out_dim)
    }

    pub fn hidden_dims(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(Layer::out_dim)
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}

fn validate(cfg: &HeadConfig) -> Result<()> {
    if cfg.widths().contains(&0) {
        return Err(Error::invalid(format!(
            "head widths must be positive, got {:?}",
            cfg.widths()
        )));
    }
    Ok(())
}

/// Glorot-uniform weights from the seeded generator, zero biases.
///
/// Weights are drawn layer by layer in row-major order from
/// `U(-sqrt(6 / (in + out)), +sqrt(6 / (in + out)))`.
pub fn init_head(cfg: &HeadConfig) -> Result<HeadParams> {
    let mut params = HeadParams::zeros(cfg)?;
    let mut rng = SplitMix64::new(cfg.seed);
    for layer in &mut params.layers {
        let bound = (6.0 / (layer.in_dim() + layer.out_dim()) as f64).sqrt();
        layer
            .weight
            .iter_mut()
            .for_each(|w| *w = rng.uniform(-bound, bound));
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_params() {
        let cfg = HeadConfig {
            seed: 42,
            ..HeadConfig::new(16)
        };
        assert_eq!(init_head(&cfg).unwrap(), init_head(&cfg).unwrap());
        let other = HeadConfig {
            seed: 43,
            ..cfg.clone()
        };
        assert_ne!(init_head(&cfg).unwrap(), init_head(&other).unwrap());
    }

    #[test]
    fn linear_head_shapes() {
        let cfg = HeadConfig {
            input_dim: 4,
            hidden_dims: vec![],
            n_classes: 12,
            seed: 0,
        };
        let p = init_head(&cfg).unwrap();
        assert_eq!(p.layers.len(), 1);
        assert_eq!(p.layers[0].weight.dim(), (12, 4));
        assert_eq!(p.layers[0].bias.len(), 12);
        assert!(p.layers[0].bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn zero_width_rejected() {
        let cfg = HeadConfig {
            input_dim: 0,
            ..HeadConfig::new(1)
        };
        assert!(init_head(&cfg).is_err());
        let cfg = HeadConfig {
            hidden_dims: vec![8, 0],
            ..HeadConfig::new(4)
        };
        assert!(init_head(&cfg).is_err());
    }

    #[test]
    fn weights_respect_glorot_bound() {
        // 300 x 400 = 120k draws in the first layer.
        let cfg = HeadConfig {
            input_dim: 400,
            hidden_dims: vec![300],
            n_classes: 12,
            seed: 9,
        };
        let p = init_head(&cfg).unwrap();
        let bound = (6.0f64 / 700.0).sqrt();
        let w = &p.layers[0].weight;
        assert!(w.len() >= 100_000);
        let (lo, hi) = w
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(lo >= -bound && hi <= bound);
        // The draws should reach close to both ends of the interval.
        assert!(lo < -0.999 * bound && hi > 0.999 * bound);
        let mean = w.sum() / w.len() as f64;
        assert!(mean.abs() < 0.01 * bound);
    }
}
