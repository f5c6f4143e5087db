//! Per-frame softmax and categorical cross-entropy.

use crate::error::{Result, TcnError};
use crate::nn::tensor::SeqTensor;
use crate::LabelSequence;

/// Softmax over channels within each frame, stabilized by subtracting the
/// per-frame maximum logit.
pub fn softmax_frames(logits: &SeqTensor) -> Result<SeqTensor> {
    if logits.channels() == 0 {
        return Err(TcnError::config("softmax needs at least one channel"));
    }
    let mut out = SeqTensor::zeros(logits.channels(), logits.frames());
    for t in 0..logits.frames() {
        let mut m = f64::NEG_INFINITY;
        for c in 0..logits.channels() {
            m = m.max(logits.at(c, t));
        }
        let mut z = 0.0;
        for c in 0..logits.channels() {
            let e = (logits.at(c, t) - m).exp();
            out.set(c, t, e);
            z += e;
        }
        for c in 0..logits.channels() {
            out.set(c, t, out.at(c, t) / z);
        }
    }
    out.debug_assert_finite("softmax_frames");
    Ok(out)
}

/// Mean negative log-likelihood over the masked frames plus the gradient of
/// that loss with respect to the *logits* that produced `probs` (the usual
/// softmax/cross-entropy fusion: `(p - onehot) / n_valid` per masked frame).
///
/// `mask`, when given, marks the frames that count; `None` counts every
/// frame.
pub fn cross_entropy(
    probs: &SeqTensor,
    labels: &LabelSequence,
    mask: Option<&[bool]>,
) -> Result<(f64, SeqTensor)> {
    if labels.len() != probs.frames() {
        return Err(TcnError::data(format!(
            "{} labels for {} frames",
            labels.len(),
            probs.frames()
        )));
    }
    if let Some(m) = mask {
        if m.len() != probs.frames() {
            return Err(TcnError::data(format!(
                "mask covers {} frames, expected {}",
                m.len(),
                probs.frames()
            )));
        }
    }
    let n_valid = match mask {
        None => probs.frames(),
        Some(m) => m.iter().filter(|&&v| v).count(),
    };
    if n_valid == 0 {
        return Err(TcnError::data("no valid frames under the mask"));
    }
    let mut loss = 0.0;
    let mut d_logits = SeqTensor::zeros(probs.channels(), probs.frames());
    let inv = 1.0 / n_valid as f64;
    for t in 0..probs.frames() {
        if let Some(m) = mask {
            if !m[t] {
                continue;
            }
        }
        let y = labels[t];
        if y >= probs.channels() {
            return Err(TcnError::data(format!(
                "label {} out of range for {} classes at frame {}",
                y,
                probs.channels(),
                t
            )));
        }
        // Guard against log(0) from fully saturated probabilities.
        loss -= probs.at(y, t).max(1e-300).ln();
        for c in 0..probs.channels() {
            let delta = if c == y { 1.0 } else { 0.0 };
            d_logits.set(c, t, (probs.at(c, t) - delta) * inv);
        }
    }
    Ok((loss * inv, d_logits))
}
