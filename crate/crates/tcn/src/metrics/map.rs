//! Detection-style mean average precision over segments with confidences.

use super::segment::{iou, Segment};
use crate::error::{Result, TcnError};
use crate::nn::SeqTensor;

/// True-positive test for a candidate (prediction, truth) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchCriterion {
    /// Prediction midpoint falls inside the truth interval.
    Midpoint,
    /// Interval IoU reaches the threshold.
    Iou(f64),
}

/// How a segment's confidence is pooled from per-frame class probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfidencePolicy {
    Mean,
    Max,
}

impl ConfidencePolicy {
    pub fn name(self) -> &'static str {
        match self {
            ConfidencePolicy::Mean => "mean",
            ConfidencePolicy::Max => "max",
        }
    }
}

/// Pools the segment's own-class probability over its frames.
pub fn segment_confidence(
    probs: &SeqTensor,
    seg: &Segment,
    policy: ConfidencePolicy,
) -> Result<f64> {
    if seg.class_id >= probs.channels() {
        return Err(TcnError::data(format!(
            "segment class {} out of range for {} classes",
            seg.class_id,
            probs.channels()
        )));
    }
    if seg.start >= seg.end || seg.end > probs.frames() {
        return Err(TcnError::data(format!(
            "segment [{}, {}) outside the {}-frame sequence",
            seg.start,
            seg.end,
            probs.frames()
        )));
    }
    let row = &probs.row(seg.class_id)[seg.start..seg.end];
    Ok(match policy {
        ConfidencePolicy::Mean => row.iter().sum::<f64>() / row.len() as f64,
        ConfidencePolicy::Max => row.iter().fold(f64::MIN, |m, &v| m.max(v)),
    })
}

/// Copies the segments with confidences pooled under `policy`.
pub fn attach_confidences(
    probs: &SeqTensor,
    segments: &[Segment],
    policy: ConfidencePolicy,
) -> Result<Vec<Segment>> {
    segments
        .iter()
        .map(|s| {
            let mut out = s.clone();
            out.confidence = Some(segment_confidence(probs, s, policy)?);
            Ok(out)
        })
        .collect()
}

/// mAP for one sequence; see [`map_detection_pooled`].
pub fn map_detection(
    pred: &[Segment],
    truth: &[Segment],
    criterion: MatchCriterion,
) -> Result<f64> {
    map_detection_pooled(&[(pred, truth)], criterion)
}

/// Mean average precision with predictions pooled across sequences.
///
/// Per class: predictions sort by descending confidence and greedily claim
/// unmatched truths of their own sequence under the criterion; the
/// all-points interpolated area under the precision-recall curve is that
/// class's AP. Classes never seen in truth are skipped; mAP averages the
/// rest. Every prediction must carry a confidence.
pub fn map_detection_pooled(
    sequences: &[(&[Segment], &[Segment])],
    criterion: MatchCriterion,
) -> Result<f64> {
    if let MatchCriterion::Iou(tau) = criterion {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(TcnError::config(format!(
                "overlap threshold must be in (0, 1], got {tau}"
            )));
        }
    }
    let mut classes: Vec<usize> = sequences
        .iter()
        .flat_map(|(_, truth)| truth.iter().map(|s| s.class_id))
        .collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.is_empty() {
        let any_pred = sequences.iter().any(|(pred, _)| !pred.is_empty());
        return Ok(if any_pred { 0.0 } else { 100.0 });
    }

    let mut total = 0.0;
    for &class in &classes {
        total += average_precision(sequences, class, criterion)?;
    }
    Ok(100.0 * total / classes.len() as f64)
}

fn average_precision(
    sequences: &[(&[Segment], &[Segment])],
    class: usize,
    criterion: MatchCriterion,
) -> Result<f64> {
    // (confidence, sequence, segment), sorted by confidence with a
    // deterministic positional tie-break.
    let mut preds: Vec<(f64, usize, &Segment)> = Vec::new();
    let mut n_truth = 0usize;
    let mut truths: Vec<Vec<&Segment>> = vec![Vec::new(); sequences.len()];
    for (si, (pred, truth)) in sequences.iter().enumerate() {
        for s in pred.iter().filter(|s| s.class_id == class) {
            let conf = s.confidence.ok_or_else(|| {
                TcnError::data(format!(
                    "prediction [{}, {}) of class {class} has no confidence",
                    s.start, s.end
                ))
            })?;
            preds.push((conf, si, s));
        }
        for s in truth.iter().filter(|s| s.class_id == class) {
            truths[si].push(s);
            n_truth += 1;
        }
    }
    if n_truth == 0 {
        return Ok(0.0);
    }
    preds.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.start.cmp(&b.2.start))
    });

    let mut matched: Vec<Vec<bool>> = truths.iter().map(|t| vec![false; t.len()]).collect();
    let mut hits = Vec::with_capacity(preds.len());
    for (_, si, p) in preds {
        let candidates = &truths[si];
        let mut best: Option<(usize, f64)> = None;
        for (j, t) in candidates.iter().enumerate() {
            if matched[si][j] {
                continue;
            }
            let ok_score = match criterion {
                MatchCriterion::Iou(_) => iou(p, t),
                MatchCriterion::Midpoint => {
                    let m = p.midpoint();
                    if (t.start as f64) <= m && m < t.end as f64 {
                        1.0
                    } else {
                        continue;
                    }
                }
            };
            if best.is_none_or(|(_, b)| ok_score > b) {
                best = Some((j, ok_score));
            }
        }
        let hit = match (criterion, best) {
            (MatchCriterion::Iou(tau), Some((j, s))) if s >= tau => {
                matched[si][j] = true;
                true
            }
            (MatchCriterion::Midpoint, Some((j, _))) => {
                matched[si][j] = true;
                true
            }
            _ => false,
        };
        hits.push(hit);
    }

    // All-points interpolation: precision envelope from the right, summed
    // over recall increments.
    let mut recall = Vec::with_capacity(hits.len());
    let mut precision = Vec::with_capacity(hits.len());
    let mut tp = 0usize;
    for (i, &hit) in hits.iter().enumerate() {
        tp += usize::from(hit);
        recall.push(tp as f64 / n_truth as f64);
        precision.push(tp as f64 / (i + 1) as f64);
    }
    let mut envelope = precision.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (r, p) in recall.iter().zip(&envelope) {
        ap += (r - prev_recall) * p;
        prev_recall = *r;
    }
    Ok(ap)
}
