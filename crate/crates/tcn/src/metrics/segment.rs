//! Segments are maximal same-class frame runs: half-open intervals
//! `[start, end)` with a class id and an optional detection confidence.

use crate::error::{Result, TcnError};
use crate::LabelSequence;

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub class_id: usize,
    /// First frame, inclusive.
    pub start: usize,
    /// One past the last frame.
    pub end: usize,
    pub confidence: Option<f64>,
}

impl Segment {
    pub fn new(class_id: usize, start: usize, end: usize) -> Self {
        debug_assert!(start < end, "segment [{start}, {end}) is empty");
        Segment {
            class_id,
            start,
            end,
            confidence: None,
        }
    }

    pub fn with_confidence(class_id: usize, start: usize, end: usize, confidence: f64) -> Self {
        Segment {
            confidence: Some(confidence),
            ..Segment::new(class_id, start, end)
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Continuous center of the half-open interval.
    pub fn midpoint(&self) -> f64 {
        (self.start + self.end) as f64 / 2.0
    }
}

/// Splits a label sequence into maximal runs of equal labels.
pub fn labels_to_segments(labels: &[usize]) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut start = 0;
    for t in 1..=labels.len() {
        if t == labels.len() || labels[t] != labels[start] {
            out.push(Segment::new(labels[start], start, t));
            start = t;
        }
    }
    out
}

/// Inverse of [`labels_to_segments`]. The segments must be sorted and tile
/// `[0, T)` without gaps or overlaps.
pub fn segments_to_labels(segments: &[Segment]) -> Result<LabelSequence> {
    let mut labels = Vec::new();
    let mut cursor = 0;
    for seg in segments {
        if seg.start != cursor {
            return Err(TcnError::data(format!(
                "segment [{}, {}) does not start at frame {cursor}",
                seg.start, seg.end
            )));
        }
        if seg.start >= seg.end {
            return Err(TcnError::data(format!(
                "segment [{}, {}) is empty",
                seg.start, seg.end
            )));
        }
        labels.extend(std::iter::repeat_n(seg.class_id, seg.len()));
        cursor = seg.end;
    }
    Ok(labels)
}

/// Intersection over union of two frame intervals, ignoring class.
pub fn iou(a: &Segment, b: &Segment) -> f64 {
    let inter = a.end.min(b.end).saturating_sub(a.start.max(b.start));
    if inter == 0 {
        return 0.0;
    }
    let union = a.end.max(b.end) - a.start.min(b.start);
    inter as f64 / union as f64
}
