//! Per-frame linear map: the same `out_dim x in_dim` matrix and bias applied
//! independently to every frame. Used for output heads, residual mixing and
//! the dilated model's input projection.

use crate::error::{Result, TcnError};
use crate::nn::tensor::SeqTensor;

/// Weight layout: `weights[o * in_dim + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub out_dim: usize,
    pub in_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        DenseLayer {
            out_dim,
            in_dim,
            weights: vec![0.0; out_dim * in_dim],
            bias: vec![0.0; out_dim],
        }
    }

    /// Identity map; requires a square shape.
    pub fn identity(dim: usize) -> Self {
        let mut layer = DenseLayer::zeros(dim, dim);
        for i in 0..dim {
            layer.weights[i * dim + i] = 1.0;
        }
        layer
    }
}

pub fn dense_forward(input: &SeqTensor, layer: &DenseLayer) -> Result<SeqTensor> {
    if input.channels() != layer.in_dim {
        return Err(TcnError::config(format!(
            "dense layer expects {} input channels, got {}",
            layer.in_dim,
            input.channels()
        )));
    }
    let frames = input.frames();
    let mut out = SeqTensor::zeros(layer.out_dim, frames);
    for o in 0..layer.out_dim {
        let b = layer.bias[o];
        let out_row = out.row_mut(o);
        out_row.iter_mut().for_each(|v| *v = b);
        for i in 0..layer.in_dim {
            let w = layer.weights[o * layer.in_dim + i];
            if w == 0.0 {
                continue;
            }
            for (dst, s) in out_row.iter_mut().zip(input.row(i)) {
                *dst += w * s;
            }
        }
    }
    out.debug_assert_finite("dense_forward");
    Ok(out)
}

/// Returns `(d_input, d_weights, d_bias)`.
pub fn dense_backward(
    input: &SeqTensor,
    layer: &DenseLayer,
    upstream: &SeqTensor,
) -> Result<(SeqTensor, Vec<f64>, Vec<f64>)> {
    if input.channels() != layer.in_dim {
        return Err(TcnError::config(format!(
            "dense layer expects {} input channels, got {}",
            layer.in_dim,
            input.channels()
        )));
    }
    if upstream.channels() != layer.out_dim || upstream.frames() != input.frames() {
        return Err(TcnError::config(format!(
            "upstream gradient is {}x{}, expected {}x{}",
            upstream.channels(),
            upstream.frames(),
            layer.out_dim,
            input.frames()
        )));
    }
    let mut d_input = SeqTensor::zeros(layer.in_dim, input.frames());
    let mut d_weights = vec![0.0; layer.weights.len()];
    let mut d_bias = vec![0.0; layer.out_dim];
    for o in 0..layer.out_dim {
        let g_row = upstream.row(o);
        d_bias[o] = g_row.iter().sum();
        for i in 0..layer.in_dim {
            let mut acc = 0.0;
            for (g, x) in g_row.iter().zip(input.row(i)) {
                acc += g * x;
            }
            d_weights[o * layer.in_dim + i] = acc;
            let w = layer.weights[o * layer.in_dim + i];
            if w != 0.0 {
                let d_row = d_input.row_mut(i);
                for (d, g) in d_row.iter_mut().zip(g_row) {
                    *d += w * g;
                }
            }
        }
    }
    Ok((d_input, d_weights, d_bias))
}
