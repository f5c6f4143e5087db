//! Segmental overlap F1 and segmental edit score.

use super::segment::{iou, Segment};
use crate::error::{Result, TcnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl MatchCounts {
    pub fn add(&mut self, other: MatchCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn zero() -> Self {
        MatchCounts {
            tp: 0,
            fp: 0,
            fn_: 0,
        }
    }

    /// 100 * F1, with zero-denominator precision/recall defined as 0.
    pub fn f1(&self) -> f64 {
        let prec = if self.tp + self.fp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        };
        let rec = if self.tp + self.fn_ == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        };
        if prec + rec == 0.0 {
            0.0
        } else {
            100.0 * 2.0 * prec * rec / (prec + rec)
        }
    }
}

/// Greedy overlap matching. Predictions are visited in temporal order; each
/// claims the unmatched same-class truth segment of highest IoU (ties go to
/// the earlier truth) and counts as a true positive when that IoU reaches
/// `tau`, otherwise as a false positive. Unclaimed truths are false
/// negatives. Segments of classes in `ignore` are excluded on both sides.
pub fn f1_counts(
    pred: &[Segment],
    truth: &[Segment],
    tau: f64,
    ignore: &[usize],
) -> Result<MatchCounts> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(TcnError::config(format!(
            "overlap threshold must be in (0, 1], got {tau}"
        )));
    }
    let keep = |s: &&Segment| !ignore.contains(&s.class_id);
    let truths: Vec<&Segment> = truth.iter().filter(keep).collect();
    let mut preds: Vec<&Segment> = pred.iter().filter(keep).collect();
    preds.sort_by_key(|s| (s.start, s.end));

    let mut matched = vec![false; truths.len()];
    let mut counts = MatchCounts::zero();
    for p in preds {
        let mut best: Option<(usize, f64)> = None;
        for (j, t) in truths.iter().enumerate() {
            if matched[j] || t.class_id != p.class_id {
                continue;
            }
            let overlap = iou(p, t);
            // Strict improvement keeps the earliest truth on ties.
            if best.is_none_or(|(_, b)| overlap > b) {
                best = Some((j, overlap));
            }
        }
        match best {
            Some((j, overlap)) if overlap >= tau => {
                matched[j] = true;
                counts.tp += 1;
            }
            _ => counts.fp += 1,
        }
    }
    counts.fn_ = matched.iter().filter(|&&m| !m).count();
    Ok(counts)
}

/// 100 * F1 of the greedy matching at overlap threshold `tau`.
pub fn f1_at_k(pred: &[Segment], truth: &[Segment], tau: f64, ignore: &[usize]) -> Result<f64> {
    Ok(f1_counts(pred, truth, tau, ignore)?.f1())
}

/// Unit-cost Levenshtein distance between two label strings.
pub fn levenshtein(a: &[usize], b: &[usize]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut prev_diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev_diag + usize::from(ca != cb);
            prev_diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(prev_diag + 1);
        }
    }
    row[b.len()]
}

/// Segmental edit score: 100 * (1 - distance / max segment count) over the
/// ordered class strings, 100 when both are empty. Penalizes out-of-order
/// and over-segmented predictions regardless of segment durations.
pub fn edit_score(pred: &[Segment], truth: &[Segment], ignore: &[usize]) -> f64 {
    let string = |segs: &[Segment]| -> Vec<usize> {
        segs.iter()
            .filter(|s| !ignore.contains(&s.class_id))
            .map(|s| s.class_id)
            .collect()
    };
    let p = string(pred);
    let t = string(truth);
    let longest = p.len().max(t.len());
    if longest == 0 {
        return 100.0;
    }
    100.0 * (1.0 - levenshtein(&p, &t) as f64 / longest as f64)
}
