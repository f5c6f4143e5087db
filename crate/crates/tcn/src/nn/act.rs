//! Per-frame nonlinearities, including the gated unit (tanh half times
//! sigmoid half) and a normalized ReLU that rescales each frame by its
//! channel-wise maximum.

use crate::error::{Result, TcnError};
use crate::nn::tensor::SeqTensor;

/// Stabilizer added to the per-frame maximum in `NormRelu`.
pub const NORM_RELU_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Relu,
    Tanh,
    /// `tanh(a) * sigmoid(b)` where `a`/`b` are the first/second half of the
    /// input channels; output width is half the input width.
    Gated,
    /// `relu(x) / (max_c relu(x_c) + eps)`, the max taken across channels
    /// within each frame.
    NormRelu,
}

impl Activation {
    /// Conv output channels needed so the post-activation width is `filters`.
    pub fn conv_channels(self, filters: usize) -> usize {
        match self {
            Activation::Gated => 2 * filters,
            _ => filters,
        }
    }

    /// Post-activation channel count for a given input width.
    pub fn output_channels(self, input_channels: usize) -> Result<usize> {
        match self {
            Activation::Gated => {
                if !input_channels.is_multiple_of(2) {
                    return Err(TcnError::config(format!(
                        "gated activation needs an even channel count, got {input_channels}"
                    )));
                }
                Ok(input_channels / 2)
            }
            _ => Ok(input_channels),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Gated => "gated",
            Activation::NormRelu => "norm_relu",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "gated" => Ok(Activation::Gated),
            "norm_relu" | "normalized_relu" => Ok(Activation::NormRelu),
            other => Err(TcnError::config(format!(
                "unknown activation '{other}' (expected sigmoid, relu, tanh, gated or norm_relu)"
            ))),
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn activation_forward(input: &SeqTensor, kind: Activation) -> Result<SeqTensor> {
    let out = match kind {
        Activation::Sigmoid => map_elementwise(input, sigmoid),
        Activation::Relu => map_elementwise(input, |x| x.max(0.0)),
        Activation::Tanh => map_elementwise(input, f64::tanh),
        Activation::Gated => {
            let half = kind.output_channels(input.channels())?;
            let mut out = SeqTensor::zeros(half, input.frames());
            for c in 0..half {
                let a = input.row(c);
                let b = input.row(half + c);
                let row = out.row_mut(c);
                for t in 0..a.len() {
                    row[t] = a[t].tanh() * sigmoid(b[t]);
                }
            }
            out
        }
        Activation::NormRelu => {
            let mut out = SeqTensor::zeros(input.channels(), input.frames());
            for t in 0..input.frames() {
                let mut m = 0.0f64;
                for c in 0..input.channels() {
                    m = m.max(input.at(c, t));
                }
                let denom = m + NORM_RELU_EPS;
                for c in 0..input.channels() {
                    out.set(c, t, input.at(c, t).max(0.0) / denom);
                }
            }
            out
        }
    };
    out.debug_assert_finite("activation_forward");
    Ok(out)
}

/// Gradient with respect to the activation input. The returned tensor has
/// the *input's* channel count (twice the output width for `Gated`).
pub fn activation_backward(
    input: &SeqTensor,
    upstream: &SeqTensor,
    kind: Activation,
) -> Result<SeqTensor> {
    let expect_ch = kind.output_channels(input.channels())?;
    if upstream.channels() != expect_ch || upstream.frames() != input.frames() {
        return Err(TcnError::config(format!(
            "upstream gradient is {}x{}, expected {}x{}",
            upstream.channels(),
            upstream.frames(),
            expect_ch,
            input.frames()
        )));
    }
    let out = match kind {
        Activation::Sigmoid => zip_elementwise(input, upstream, |x, u| {
            let s = sigmoid(x);
            u * s * (1.0 - s)
        }),
        Activation::Relu => zip_elementwise(input, upstream, |x, u| if x > 0.0 { u } else { 0.0 }),
        Activation::Tanh => zip_elementwise(input, upstream, |x, u| {
            let t = x.tanh();
            u * (1.0 - t * t)
        }),
        Activation::Gated => {
            let half = expect_ch;
            let mut d = SeqTensor::zeros(input.channels(), input.frames());
            for c in 0..half {
                let a = input.row(c);
                let b = input.row(half + c);
                let u = upstream.row(c);
                for t in 0..a.len() {
                    let ta = a[t].tanh();
                    let sb = sigmoid(b[t]);
                    d.set(c, t, u[t] * sb * (1.0 - ta * ta));
                    d.set(half + c, t, u[t] * ta * sb * (1.0 - sb));
                }
            }
            d
        }
        Activation::NormRelu => {
            let mut d = SeqTensor::zeros(input.channels(), input.frames());
            for t in 0..input.frames() {
                // Recover the per-frame max and the (first) channel holding it.
                let mut m = 0.0f64;
                let mut arg = 0usize;
                for c in 0..input.channels() {
                    let r = input.at(c, t).max(0.0);
                    if r > m {
                        m = r;
                        arg = c;
                    }
                }
                let denom = m + NORM_RELU_EPS;
                // The max channel's gradient picks up the rescaling term
                // sum_c u_c * out_c.
                let mut weighted = 0.0;
                for c in 0..input.channels() {
                    weighted += upstream.at(c, t) * input.at(c, t).max(0.0) / denom;
                }
                for c in 0..input.channels() {
                    if input.at(c, t) > 0.0 {
                        let mut g = upstream.at(c, t);
                        if c == arg {
                            g -= weighted;
                        }
                        d.set(c, t, g / denom);
                    }
                }
            }
            d
        }
    };
    Ok(out)
}

fn map_elementwise(input: &SeqTensor, f: impl Fn(f64) -> f64) -> SeqTensor {
    let mut out = input.clone();
    out.as_mut_slice().iter_mut().for_each(|v| *v = f(*v));
    out
}

fn zip_elementwise(
    input: &SeqTensor,
    upstream: &SeqTensor,
    f: impl Fn(f64, f64) -> f64,
) -> SeqTensor {
    let mut out = SeqTensor::zeros(input.channels(), input.frames());
    for ((o, x), u) in out
        .as_mut_slice()
        .iter_mut()
        .zip(input.as_slice())
        .zip(upstream.as_slice())
    {
        *o = f(*x, *u);
    }
    out
}
