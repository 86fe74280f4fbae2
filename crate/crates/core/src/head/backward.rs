use ndarray::{Array2, ArrayView2, Axis};

use super::forward::activations;
use super::{softmax_rows, HeadParams, Layer};
use crate::error::{Error, Result};

/// Gradients of the mean cross-entropy, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
    /// Loss at the point where the gradient was taken.
    pub loss: f64,
    /// Number of rows whose argmax matched the label.
    pub correct: usize,
}

/// Analytic gradient of `cross_entropy(forward(params, batch), labels)`.
pub fn backward(
    params: &HeadParams,
    batch: ArrayView2<'_, f64>,
    labels: &[usize],
) -> Result<Gradients> {
    let n = batch.nrows();
    if n != labels.len() || n == 0 {
        return Err(Error::invalid(format!(
            "batch of {n} rows with {} labels",
            labels.len()
        )));
    }
    let n_classes = params.n_classes();
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::invalid(format!(
            "label {bad} out of range 0..{n_classes}"
        )));
    }

    let (inputs, logits) = activations(params, batch)?;
    let probs = softmax_rows(logits);
    let loss = super::cross_entropy(&probs, labels)?;
    let correct = probs
        .axis_iter(Axis(0))
        .zip(labels)
        .filter(|(row, &l)| super::forward::argmax(row.iter().copied()) == l)
        .count();

    // d loss / d logits = (softmax - onehot) / n
    let mut delta: Array2<f64> = probs;
    for (mut row, &l) in delta.axis_iter_mut(Axis(0)).zip(labels) {
        row[l] -= 1.0;
    }
    delta /= n as f64;

    let mut grads: Vec<Layer> = Vec::with_capacity(params.layers.len());
    for (i, layer) in params.layers.iter().enumerate().rev() {
        let input = &inputs[i];
        let weight = delta.t().dot(input);
        let bias = delta.sum_axis(Axis(0));
        if i > 0 {
            let mut upstream = delta.dot(&layer.weight);
            // ReLU: the layer input is positive exactly where the unit was active.
            upstream.zip_mut_with(input, |d, &a| {
                if a <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = upstream;
        }
        grads.push(Layer { weight, bias });
    }
    grads.reverse();

    Ok(Gradients {
        layers: grads,
        loss,
        correct,
    })
}
