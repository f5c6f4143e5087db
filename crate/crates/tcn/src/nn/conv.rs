//! Temporal (1-D, per-channel-mixing) convolution over a feature sequence.
//!
//! A filter of duration `d` has `d` taps. In causal mode the taps cover
//! frames `t-d+1 ..= t`; in acausal mode they form a window centered on `t`
//! with the extra tap on the past side when `d` is even. Taps may be spaced
//! `dilation` frames apart (dilation 1 = dense window). Out-of-range frames
//! contribute zero, so output length always equals input length.

use crate::error::{Result, TcnError};
use crate::nn::tensor::SeqTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvMode {
    /// Window ends at the current frame; no future frames are read.
    Causal,
    /// Window centered on the current frame (left-biased for even durations).
    Acausal,
}

/// A bank of temporal filters: `out_channels` filters, each spanning all
/// `in_channels` over `taps` frames, plus one bias per output channel.
///
/// Weight layout: `weights[((o * in_channels) + i) * taps + k]` for output
/// channel `o`, input channel `i`, tap `k` (tap 0 is the earliest frame).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvFilterBank {
    pub out_channels: usize,
    pub in_channels: usize,
    pub taps: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvFilterBank {
    /// Zero-initialized bank (weights are filled in by the model builder).
    pub fn zeros(out_channels: usize, in_channels: usize, taps: usize) -> Self {
        ConvFilterBank {
            out_channels,
            in_channels,
            taps,
            weights: vec![0.0; out_channels * in_channels * taps],
            bias: vec![0.0; out_channels],
        }
    }

    pub fn from_parts(
        out_channels: usize,
        in_channels: usize,
        taps: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if weights.len() != out_channels * in_channels * taps {
            return Err(TcnError::config(format!(
                "filter bank expects {} weights, got {}",
                out_channels * in_channels * taps,
                weights.len()
            )));
        }
        if bias.len() != out_channels {
            return Err(TcnError::config(format!(
                "filter bank expects {} biases, got {}",
                out_channels,
                bias.len()
            )));
        }
        Ok(ConvFilterBank {
            out_channels,
            in_channels,
            taps,
            weights,
            bias,
        })
    }

    #[inline]
    fn weight(&self, o: usize, i: usize, k: usize) -> f64 {
        self.weights[(o * self.in_channels + i) * self.taps + k]
    }
}

/// Frame offset read by tap `k` relative to the output frame.
#[inline]
fn tap_offset(mode: ConvMode, taps: usize, k: usize, dilation: usize) -> isize {
    let d = dilation as isize;
    match mode {
        ConvMode::Causal => -((taps - 1 - k) as isize) * d,
        ConvMode::Acausal => (k as isize - (taps / 2) as isize) * d,
    }
}

fn check_conv_args(input: &SeqTensor, filters: &ConvFilterBank, dilation: usize) -> Result<()> {
    if input.channels() != filters.in_channels {
        return Err(TcnError::config(format!(
            "convolution expects {} input channels, got {}",
            filters.in_channels,
            input.channels()
        )));
    }
    if filters.taps == 0 {
        return Err(TcnError::config("convolution needs at least one tap"));
    }
    if dilation == 0 {
        return Err(TcnError::config("dilation must be at least 1"));
    }
    Ok(())
}

/// Range of output frames `t` for which `t + off` is a valid input frame.
#[inline]
fn valid_range(frames: usize, off: isize) -> (usize, usize) {
    let t0 = if off < 0 { (-off) as usize } else { 0 };
    let t1 = if off > 0 {
        frames.saturating_sub(off as usize)
    } else {
        frames
    };
    (t0.min(frames), t1.max(t0).min(frames))
}

pub fn temporal_conv_forward(
    input: &SeqTensor,
    filters: &ConvFilterBank,
    mode: ConvMode,
    dilation: usize,
) -> Result<SeqTensor> {
    check_conv_args(input, filters, dilation)?;
    let frames = input.frames();
    let mut out = SeqTensor::zeros(filters.out_channels, frames);
    for o in 0..filters.out_channels {
        let b = filters.bias[o];
        let out_row = out.row_mut(o);
        out_row.iter_mut().for_each(|v| *v = b);
        for i in 0..filters.in_channels {
            let in_row = input.row(i);
            for k in 0..filters.taps {
                let w = filters.weight(o, i, k);
                if w == 0.0 {
                    continue;
                }
                let off = tap_offset(mode, filters.taps, k, dilation);
                let (t0, t1) = valid_range(frames, off);
                if t0 >= t1 {
                    continue;
                }
                let src = &in_row[(t0 as isize + off) as usize..(t1 as isize + off) as usize];
                for (dst, s) in out_row[t0..t1].iter_mut().zip(src) {
                    *dst += w * s;
                }
            }
        }
    }
    out.debug_assert_finite("temporal_conv_forward");
    Ok(out)
}

/// Gradients of a scalar loss through the convolution.
///
/// Returns `(d_input, d_weights, d_bias)`; the weight/bias gradients use the
/// same layout as [`ConvFilterBank`].
pub fn temporal_conv_backward(
    input: &SeqTensor,
    filters: &ConvFilterBank,
    mode: ConvMode,
    dilation: usize,
    upstream: &SeqTensor,
) -> Result<(SeqTensor, Vec<f64>, Vec<f64>)> {
    check_conv_args(input, filters, dilation)?;
    if upstream.channels() != filters.out_channels || upstream.frames() != input.frames() {
        return Err(TcnError::config(format!(
            "upstream gradient is {}x{}, expected {}x{}",
            upstream.channels(),
            upstream.frames(),
            filters.out_channels,
            input.frames()
        )));
    }
    let frames = input.frames();
    let mut d_input = SeqTensor::zeros(filters.in_channels, frames);
    let mut d_weights = vec![0.0; filters.weights.len()];
    let mut d_bias = vec![0.0; filters.out_channels];

    for o in 0..filters.out_channels {
        let g_row = upstream.row(o);
        d_bias[o] = g_row.iter().sum();
        for i in 0..filters.in_channels {
            let in_row = input.row(i);
            for k in 0..filters.taps {
                let off = tap_offset(mode, filters.taps, k, dilation);
                let (t0, t1) = valid_range(frames, off);
                if t0 >= t1 {
                    continue;
                }
                let src = &in_row[(t0 as isize + off) as usize..(t1 as isize + off) as usize];
                let mut acc = 0.0;
                for (g, s) in g_row[t0..t1].iter().zip(src) {
                    acc += g * s;
                }
                d_weights[(o * filters.in_channels + i) * filters.taps + k] = acc;

                let w = filters.weight(o, i, k);
                if w != 0.0 {
                    let d_row = d_input.row_mut(i);
                    let dst =
                        &mut d_row[(t0 as isize + off) as usize..(t1 as isize + off) as usize];
                    for (d, g) in dst.iter_mut().zip(&g_row[t0..t1]) {
                        *d += w * g;
                    }
                }
            }
        }
    }
    Ok((d_input, d_weights, d_bias))
}
