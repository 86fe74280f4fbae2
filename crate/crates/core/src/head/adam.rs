use super::{Gradients, HeadParams, Layer, TrainConfig};

/// First and second moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Layer>,
    pub v: Vec<Layer>,
}

impl AdamState {
    pub fn new(params: &HeadParams) -> Self {
        let zeros: Vec<Layer> = params
            .layers
            .iter()
            .map(|l| Layer::zeros(l.out_dim(), l.in_dim()))
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// Bias-corrected Adam update of one tensor, step index `t >= 1`.
///
/// `m <- b1 m + (1 - b1) g`, `v <- b2 v + (1 - b2) g^2`,
/// `p <- p - lr * m_hat / (sqrt(v_hat) + eps)`.
#[allow(clippy::too_many_arguments)]
pub fn adam_update(
    p: &mut [f64],
    m: &mut [f64],
    v: &mut [f64],
    g: &[f64],
    t: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    assert!(t >= 1, "Adam step index starts at 1");
    let c1 = 1.0 - beta1.powf(t as f64);
    let c2 = 1.0 - beta2.powf(t as f64);
    for i in 0..p.len() {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// One Adam step over every weight and bias.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut HeadParams,
    grads: &Gradients,
    t: u64,
    cfg: &TrainConfig,
) {
    let layers = params
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()));
    for ((p, g), (m, v)) in layers {
        adam_update(
            p.weight.as_slice_mut().expect("standard layout"),
            m.weight.as_slice_mut().expect("standard layout"),
            v.weight.as_slice_mut().expect("standard layout"),
            g.weight.as_slice().expect("standard layout"),
            t,
            cfg.learning_rate,
            cfg.beta1,
            cfg.beta2,
            cfg.epsilon,
        );
        adam_update(
            p.bias.as_slice_mut().expect("contiguous"),
            m.bias.as_slice_mut().expect("contiguous"),
            v.bias.as_slice_mut().expect("contiguous"),
            g.bias.as_slice().expect("contiguous"),
            t,
            cfg.learning_rate,
            cfg.beta1,
            cfg.beta2,
            cfg.epsilon,
        );
    }
}
