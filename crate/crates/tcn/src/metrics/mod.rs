//! Segment representation and the evaluation suite: frame accuracy,
//! segmental edit score, overlap F1, and detection mAP.

mod f1;
mod frame;
mod map;
mod report;
mod segment;

pub use f1::{edit_score, f1_at_k, f1_counts, levenshtein, MatchCounts};
pub use frame::{frame_accuracy, per_class_accuracy};
pub use map::{
    attach_confidences, map_detection, map_detection_pooled, segment_confidence, ConfidencePolicy,
    MatchCriterion,
};
pub use report::{evaluate_dataset, DetectionScores, EvalReport, EvalSettings};
pub use segment::{iou, labels_to_segments, segments_to_labels, Segment};
