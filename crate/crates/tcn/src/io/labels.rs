//! Label files: one integer class id per line, always text for diffability.

use crate::error::{Result, TcnError};
use crate::LabelSequence;
use std::fs;
use std::path::Path;

pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelSequence> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| TcnError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let label: usize = line.parse().map_err(|_| {
            TcnError::parse(
                path.display().to_string(),
                format!("line {}", i + 1),
                format!("bad class id {line:?}"),
            )
        })?;
        out.push(label);
    }
    Ok(out)
}

pub fn write_labels(labels: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::with_capacity(labels.len() * 3);
    for label in labels {
        text.push_str(&label.to_string());
        text.push('\n');
    }
    fs::write(path, text)
        .map_err(|e| TcnError::data(format!("cannot write {}: {e}", path.display())))
}
