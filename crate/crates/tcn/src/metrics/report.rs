//! Dataset-level evaluation: aggregates the per-sequence metrics into one
//! report and serializes it as flat key=value text or JSON.

use super::f1::{edit_score, f1_counts, MatchCounts};
use super::map::{attach_confidences, map_detection_pooled, ConfidencePolicy, MatchCriterion};
use super::segment::{labels_to_segments, Segment};
use crate::error::{Result, TcnError};
use crate::nn::SeqTensor;
use crate::LabelSequence;
use serde_json::json;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    /// Overlap thresholds for F1 and detection mAP, as fractions in (0, 1].
    pub taus: Vec<f64>,
    /// Class excluded from segmental matching (F1, edit), if any.
    pub background: Option<usize>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            taus: vec![0.10, 0.25, 0.50],
            background: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionScores {
    pub policy: ConfidencePolicy,
    pub map_mid: f64,
    /// (tau, mAP at that IoU threshold).
    pub map_at: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub sequences: usize,
    /// Micro-averaged over all frames of all sequences.
    pub frame_accuracy: f64,
    /// Mean of per-sequence edit scores.
    pub edit: f64,
    /// (tau, F1) with match counts summed over the whole dataset.
    pub f1: Vec<(f64, f64)>,
    /// Per-class frame recall, micro-averaged across sequences.
    pub per_class_accuracy: Vec<(usize, f64)>,
    /// One entry per confidence policy; empty when no probabilities were
    /// supplied.
    pub detection: Vec<DetectionScores>,
}

/// Scores predictions against truths. `probs` (per-sequence class
/// probabilities, same order) enables the detection mAP block.
pub fn evaluate_dataset(
    pairs: &[(LabelSequence, LabelSequence)],
    probs: Option<&[SeqTensor]>,
    settings: &EvalSettings,
) -> Result<EvalReport> {
    if pairs.is_empty() {
        return Err(TcnError::data("nothing to evaluate"));
    }
    for tau in &settings.taus {
        if !(*tau > 0.0 && *tau <= 1.0) {
            return Err(TcnError::config(format!(
                "overlap threshold must be in (0, 1], got {tau}"
            )));
        }
    }
    if let Some(p) = probs {
        if p.len() != pairs.len() {
            return Err(TcnError::data(format!(
                "{} probability tensors for {} sequences",
                p.len(),
                pairs.len()
            )));
        }
    }
    let ignore: Vec<usize> = settings.background.into_iter().collect();

    let mut frames = 0usize;
    let mut hits = 0usize;
    let mut class_totals: Vec<(usize, usize, usize)> = Vec::new(); // (class, hits, frames)
    let mut edit_sum = 0.0;
    let mut counts: Vec<MatchCounts> = vec![MatchCounts::zero(); settings.taus.len()];
    let mut pred_segments: Vec<Vec<Segment>> = Vec::with_capacity(pairs.len());
    let mut truth_segments: Vec<Vec<Segment>> = Vec::with_capacity(pairs.len());

    for (i, (pred, truth)) in pairs.iter().enumerate() {
        if pred.len() != truth.len() || truth.is_empty() {
            return Err(TcnError::data(format!(
                "sequence {i}: prediction has {} frames, truth has {}",
                pred.len(),
                truth.len()
            )));
        }
        frames += truth.len();
        for (p, t) in pred.iter().zip(truth) {
            let hit = usize::from(p == t);
            hits += hit;
            match class_totals.iter_mut().find(|(c, _, _)| c == t) {
                Some((_, h, n)) => {
                    *h += hit;
                    *n += 1;
                }
                None => class_totals.push((*t, hit, 1)),
            }
        }
        let ps = labels_to_segments(pred);
        let ts = labels_to_segments(truth);
        edit_sum += edit_score(&ps, &ts, &ignore);
        for (k, tau) in settings.taus.iter().enumerate() {
            counts[k].add(f1_counts(&ps, &ts, *tau, &ignore)?);
        }
        pred_segments.push(ps);
        truth_segments.push(ts);
    }

    let mut detection = Vec::new();
    if let Some(probs) = probs {
        for policy in [ConfidencePolicy::Mean, ConfidencePolicy::Max] {
            let with_conf: Vec<Vec<Segment>> = pred_segments
                .iter()
                .zip(probs)
                .map(|(segs, p)| attach_confidences(p, segs, policy))
                .collect::<Result<_>>()?;
            let pooled: Vec<(&[Segment], &[Segment])> = with_conf
                .iter()
                .zip(&truth_segments)
                .map(|(p, t)| (p.as_slice(), t.as_slice()))
                .collect();
            let map_mid = map_detection_pooled(&pooled, MatchCriterion::Midpoint)?;
            let mut map_at = Vec::with_capacity(settings.taus.len());
            for &tau in &settings.taus {
                map_at.push((
                    tau,
                    map_detection_pooled(&pooled, MatchCriterion::Iou(tau))?,
                ));
            }
            detection.push(DetectionScores {
                policy,
                map_mid,
                map_at,
            });
        }
    }

    class_totals.sort_unstable_by_key(|(c, _, _)| *c);
    Ok(EvalReport {
        sequences: pairs.len(),
        frame_accuracy: 100.0 * hits as f64 / frames as f64,
        edit: edit_sum / pairs.len() as f64,
        f1: settings
            .taus
            .iter()
            .zip(&counts)
            .map(|(&tau, c)| (tau, c.f1()))
            .collect(),
        per_class_accuracy: class_totals
            .into_iter()
            .map(|(c, h, n)| (c, 100.0 * h as f64 / n as f64))
            .collect(),
        detection,
    })
}

/// Formats an overlap threshold as the usual percent label (0.25 -> "25").
fn k_label(tau: f64) -> String {
    let k = tau * 100.0;
    if (k - k.round()).abs() < 1e-9 {
        format!("{}", k.round() as i64)
    } else {
        format!("{k:.2}")
    }
}

impl EvalReport {
    /// Flat `key=value` lines, one metric per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sequences={}", self.sequences);
        let _ = writeln!(out, "acc={:.4}", self.frame_accuracy);
        let _ = writeln!(out, "edit={:.4}", self.edit);
        for (tau, score) in &self.f1 {
            let _ = writeln!(out, "f1@{}={score:.4}", k_label(*tau));
        }
        for (class, acc) in &self.per_class_accuracy {
            let _ = writeln!(out, "class{class}.acc={acc:.4}");
        }
        for d in &self.detection {
            let _ = writeln!(out, "map_mid.{}={:.4}", d.policy.name(), d.map_mid);
            for (tau, score) in &d.map_at {
                let _ = writeln!(out, "map@{}.{}={score:.4}", k_label(*tau), d.policy.name());
            }
        }
        out
    }

    /// JSON document: metric name -> score, with nested per-class and
    /// per-policy maps.
    pub fn to_json(&self) -> String {
        let f1: serde_json::Map<String, serde_json::Value> = self
            .f1
            .iter()
            .map(|(tau, score)| (k_label(*tau), json!(score)))
            .collect();
        let per_class: serde_json::Map<String, serde_json::Value> = self
            .per_class_accuracy
            .iter()
            .map(|(c, acc)| (c.to_string(), json!(acc)))
            .collect();
        let detection: serde_json::Map<String, serde_json::Value> = self
            .detection
            .iter()
            .map(|d| {
                let map_at: serde_json::Map<String, serde_json::Value> = d
                    .map_at
                    .iter()
                    .map(|(tau, score)| (k_label(*tau), json!(score)))
                    .collect();
                (
                    d.policy.name().to_string(),
                    json!({ "map_mid": d.map_mid, "map": map_at }),
                )
            })
            .collect();
        let doc = json!({
            "sequences": self.sequences,
            "acc": self.frame_accuracy,
            "edit": self.edit,
            "f1": f1,
            "per_class_acc": per_class,
            "detection": detection,
        });
        serde_json::to_string_pretty(&doc).expect("report serialization cannot fail")
    }
}
