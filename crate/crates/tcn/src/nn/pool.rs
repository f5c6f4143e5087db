//! Width-2 max pooling across time and its inverse-shaped upsampling.
//!
//! Pooling halves the frame count, rounding up: an odd-length sequence is
//! conceptually padded with -inf so the last window holds a single frame.
//! Upsampling repeats each frame twice and truncates to the requested length,
//! which must be the length the paired pooling consumed (2T or 2T-1).

use crate::error::{Result, TcnError};
use crate::nn::tensor::SeqTensor;

/// Winning input-frame index per pooled value, for routing gradients back.
#[derive(Debug, Clone)]
pub struct PoolIndices {
    channels: usize,
    out_frames: usize,
    in_frames: usize,
    argmax: Vec<usize>,
}

pub fn max_pool_time(input: &SeqTensor) -> Result<(SeqTensor, PoolIndices)> {
    let in_frames = input.frames();
    if in_frames == 0 {
        return Err(TcnError::data("cannot pool an empty sequence"));
    }
    let out_frames = in_frames.div_ceil(2);
    let mut out = SeqTensor::zeros(input.channels(), out_frames);
    let mut argmax = vec![0usize; input.channels() * out_frames];
    for c in 0..input.channels() {
        let row = input.row(c);
        for u in 0..out_frames {
            let a = 2 * u;
            let b = 2 * u + 1;
            // Ties keep the earlier frame.
            let (v, idx) = if b < in_frames && row[b] > row[a] {
                (row[b], b)
            } else {
                (row[a], a)
            };
            out.set(c, u, v);
            argmax[c * out_frames + u] = idx;
        }
    }
    out.debug_assert_finite("max_pool_time");
    Ok((
        out,
        PoolIndices {
            channels: input.channels(),
            out_frames,
            in_frames,
            argmax,
        },
    ))
}

/// Routes each pooled gradient to the input frame that won its window.
pub fn max_pool_time_backward(indices: &PoolIndices, upstream: &SeqTensor) -> Result<SeqTensor> {
    if upstream.channels() != indices.channels || upstream.frames() != indices.out_frames {
        return Err(TcnError::config(format!(
            "upstream gradient is {}x{}, expected {}x{}",
            upstream.channels(),
            upstream.frames(),
            indices.channels,
            indices.out_frames
        )));
    }
    let mut d_input = SeqTensor::zeros(indices.channels, indices.in_frames);
    for c in 0..indices.channels {
        for u in 0..indices.out_frames {
            let idx = indices.argmax[c * indices.out_frames + u];
            let g = upstream.at(c, u);
            d_input.set(c, idx, d_input.at(c, idx) + g);
        }
    }
    Ok(d_input)
}

pub fn upsample_time(input: &SeqTensor, target_frames: usize) -> Result<SeqTensor> {
    let frames = input.frames();
    if target_frames != 2 * frames && target_frames + 1 != 2 * frames {
        return Err(TcnError::config(format!(
            "upsample target must be {} or {}, got {}",
            2 * frames,
            2 * frames - 1,
            target_frames
        )));
    }
    let mut out = SeqTensor::zeros(input.channels(), target_frames);
    for c in 0..input.channels() {
        let row = input.row(c);
        let out_row = out.row_mut(c);
        for (t, v) in out_row.iter_mut().enumerate() {
            *v = row[t / 2];
        }
    }
    Ok(out)
}

/// Each source frame accumulates the gradients of the copies it produced.
pub fn upsample_time_backward(upstream: &SeqTensor, source_frames: usize) -> Result<SeqTensor> {
    let target = upstream.frames();
    if target != 2 * source_frames && target + 1 != 2 * source_frames {
        return Err(TcnError::config(format!(
            "upstream length {} does not match {} source frames",
            target, source_frames
        )));
    }
    let mut d_input = SeqTensor::zeros(upstream.channels(), source_frames);
    for c in 0..upstream.channels() {
        let g_row = upstream.row(c);
        let d_row = d_input.row_mut(c);
        for (t, g) in g_row.iter().enumerate() {
            d_row[t / 2] += g;
        }
    }
    Ok(d_input)
}
