//! Frame-wise accuracy.

use crate::error::{Result, TcnError};

/// Percentage of frames whose predicted label equals the truth.
pub fn frame_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(TcnError::data(format!(
            "prediction has {} frames, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(TcnError::data("cannot score an empty sequence"));
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * hits as f64 / truth.len() as f64)
}

/// Per-class recall: for each class in `truth`, the percentage of its frames
/// predicted correctly. Returns `(class_id, percent)` sorted by class id.
pub fn per_class_accuracy(pred: &[usize], truth: &[usize]) -> Result<Vec<(usize, f64)>> {
    if pred.len() != truth.len() {
        return Err(TcnError::data(format!(
            "prediction has {} frames, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    let mut classes: Vec<usize> = truth.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut out = Vec::with_capacity(classes.len());
    for c in classes {
        let total = truth.iter().filter(|&&t| t == c).count();
        let hits = pred
            .iter()
            .zip(truth)
            .filter(|(p, t)| **t == c && p == t)
            .count();
        out.push((c, 100.0 * hits as f64 / total as f64));
    }
    Ok(out)
}
