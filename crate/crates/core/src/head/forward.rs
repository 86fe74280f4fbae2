use ndarray::{Array2, ArrayView2, Axis};

use super::HeadParams;
use crate::error::{Error, Result};

/// Probability floor inside the log of the cross-entropy.
pub const PROB_FLOOR: f64 = 1e-12;

fn check_width(params: &HeadParams, batch: &ArrayView2<'_, f64>) -> Result<()> {
    if batch.ncols() != params.input_dim() {
        return Err(Error::invalid(format!(
            "batch width {} does not match head input width {}",
            batch.ncols(),
            params.input_dim()
        )));
    }
    if batch.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("batch contains non-finite values"));
    }
    Ok(())
}

/// Layer inputs for every layer plus the final logits.
pub(super) fn activations(
    params: &HeadParams,
    batch: ArrayView2<'_, f64>,
) -> Result<(Vec<Array2<f64>>, Array2<f64>)> {
    check_width(params, &batch)?;
    let mut inputs = Vec::with_capacity(params.layers.len());
    let mut current = batch.to_owned();
    let last = params.layers.len() - 1;
    for (i, layer) in params.layers.iter().enumerate() {
        let mut z = current.dot(&layer.weight.t());
        z += &layer.bias;
        inputs.push(current);
        if i < last {
            z.mapv_inplace(|v| v.max(0.0));
        }
        current = z;
    }
    Ok((inputs, current))
}

pub fn logits(params: &HeadParams, batch: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    Ok(activations(params, batch)?.1)
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(mut logits: Array2<f64>) -> Array2<f64> {
    for mut row in logits.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    logits
}

/// Class probabilities, `[B x n_classes]`.
pub fn forward(params: &HeadParams, batch: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    Ok(softmax_rows(logits(params, batch)?))
}

/// Mean of `-ln(max(p[label], 1e-12))` over the batch.
pub fn cross_entropy(probs: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    if probs.nrows() != labels.len() {
        return Err(Error::invalid(format!(
            "{} probability rows but {} labels",
            probs.nrows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::invalid("cross-entropy of an empty batch"));
    }
    let mut total = 0.0;
    for (row, &label) in probs.axis_iter(Axis(0)).zip(labels) {
        let p = *row
            .get(label)
            .ok_or_else(|| Error::invalid(format!("label {label} out of range")))?;
        total -= p.max(PROB_FLOOR).ln();
    }
    Ok(total / labels.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub probs: Vec<f64>,
}

/// Argmax class per row; ties go to the lowest index.
pub fn predict(params: &HeadParams, features: ArrayView2<'_, f64>) -> Result<Vec<Prediction>> {
    let probs = forward(params, features)?;
    Ok(probs
        .axis_iter(Axis(0))
        .map(|row| Prediction {
            class: argmax(row.iter().copied()),
            probs: row.to_vec(),
        })
        .collect())
}

pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::head::{init_head, HeadConfig};
    use ndarray::array;

    fn zero_head(input_dim: usize) -> HeadParams {
        HeadParams::zeros(&HeadConfig::new(input_dim)).unwrap()
    }

    #[test]
    fn zero_params_give_uniform() {
        let p = zero_head(5);
        let batch = Array2::from_elem((3, 5), 0.7);
        let probs = forward(&p, batch.view()).unwrap();
        assert!(probs.iter().all(|&v| (v - 1.0 / 12.0).abs() < 1e-15));
    }

    #[test]
    fn two_class_closed_form() {
        let probs = softmax_rows(array![[2f64.ln(), 0.0]]);
        assert!((probs[[0, 0]] - 2.0 / 3.0).abs() < 1e-15);
        assert!((probs[[0, 1]] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn shift_invariance() {
        let base = array![[0.3, -1.2, 4.0, 0.0]];
        let shifted = base.mapv(|v| v + 123.456);
        let a = softmax_rows(base);
        let b = softmax_rows(shifted);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn huge_logits_stay_finite() {
        let probs = softmax_rows(array![[1e300, -1e300, 0.0]]);
        assert_eq!(probs[[0, 0]], 1.0);
        assert!(probs.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn cross_entropy_closed_forms() {
        let one_hot = array![[1.0, 0.0], [0.0, 1.0]];
        assert!(cross_entropy(&one_hot, &[0, 1]).unwrap() <= 1e-9);
        let uniform = Array2::from_elem((4, 12), 1.0 / 12.0);
        let loss = cross_entropy(&uniform, &[0, 3, 7, 11]).unwrap();
        assert!((loss - 12f64.ln()).abs() < 1e-12);
        let half = array![[0.5, 0.5]];
        assert!((cross_entropy(&half, &[1]).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_is_floored() {
        let probs = array![[1.0, 0.0]];
        let loss = cross_entropy(&probs, &[1]).unwrap();
        assert!((loss + PROB_FLOOR.ln()).abs() < 1e-12);
    }

    #[test]
    fn width_mismatch_rejected() {
        let p = zero_head(5);
        assert!(forward(&p, Array2::zeros((2, 4)).view()).is_err());
    }

    #[test]
    fn ties_break_low() {
        let p = zero_head(3);
        let preds = predict(&p, Array2::zeros((2, 3)).view()).unwrap();
        assert!(preds.iter().all(|pr| pr.class == 0));
        let sum: f64 = preds[0].probs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rows_sum_to_one() {
        let cfg = HeadConfig {
            input_dim: 6,
            hidden_dims: vec![5],
            n_classes: 12,
            seed: 1,
        };
        let p = init_head(&cfg).unwrap();
        let batch = Array2::from_shape_fn((4, 6), |(i, j)| (i * 7 + j) as f64 * 0.3 - 2.0);
        for row in forward(&p, batch.view()).unwrap().rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
