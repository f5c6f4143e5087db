//! Dataset manifests: a flat text index tying feature files to label files.
//!
//! ```text
//! classes=walk,run,stand
//! feature_dim=3
//! seq=train/seq_000.tcnf train/seq_000.labels train
//! seq=test/seq_000.tcnf test/seq_000.labels test
//! ```
//!
//! `classes` and `feature_dim` appear exactly once; every `seq=` line names a
//! features file, a labels file (paths relative to the manifest), and a split.

use crate::error::{Result, TcnError};
use crate::io::features::{read_features, write_features_binary, write_features_csv};
use crate::io::labels::{read_labels, write_labels};
use crate::LabelledSequence;
use std::fmt;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        match s {
            "train" => Some(Split::Train),
            "val" => Some(Split::Val),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One sequence entry; paths are relative to the manifest's directory.
#[derive(Debug, Clone)]
pub struct SequenceRecord {
    pub features: String,
    pub labels: String,
    pub split: Split,
}

#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub classes: Vec<String>,
    pub feature_dim: usize,
    pub sequences: Vec<SequenceRecord>,
}

impl DatasetManifest {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<DatasetManifest> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| TcnError::data(format!("cannot read {}: {e}", path.display())))?;
        let name = path.display().to_string();
        let mut classes: Option<Vec<String>> = None;
        let mut feature_dim: Option<usize> = None;
        let mut sequences = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = format!("line {}", i + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| TcnError::parse(&name, &at, "expected key=value"))?;
            match key.trim() {
                "classes" => {
                    if classes.is_some() {
                        return Err(TcnError::parse(&name, &at, "duplicate classes line"));
                    }
                    let list: Vec<String> = value
                        .split(',')
                        .map(|c| c.trim().to_string())
                        .filter(|c| !c.is_empty())
                        .collect();
                    if list.is_empty() {
                        return Err(TcnError::parse(&name, &at, "classes list is empty"));
                    }
                    classes = Some(list);
                }
                "feature_dim" => {
                    if feature_dim.is_some() {
                        return Err(TcnError::parse(&name, &at, "duplicate feature_dim line"));
                    }
                    let dim: usize = value.trim().parse().map_err(|_| {
                        TcnError::parse(&name, &at, format!("bad feature_dim {value:?}"))
                    })?;
                    feature_dim = Some(dim);
                }
                "seq" => {
                    let fields: Vec<&str> = value.split_whitespace().collect();
                    if fields.len() != 3 {
                        return Err(TcnError::parse(
                            &name,
                            &at,
                            "seq needs <features> <labels> <split>",
                        ));
                    }
                    let split = Split::parse(fields[2]).ok_or_else(|| {
                        TcnError::parse(&name, &at, format!("unknown split {:?}", fields[2]))
                    })?;
                    sequences.push(SequenceRecord {
                        features: fields[0].to_string(),
                        labels: fields[1].to_string(),
                        split,
                    });
                }
                other => {
                    return Err(TcnError::parse(
                        &name,
                        &at,
                        format!("unknown key {other:?}"),
                    ));
                }
            }
        }
        let classes =
            classes.ok_or_else(|| TcnError::parse(&name, "end of file", "missing classes line"))?;
        let feature_dim = feature_dim
            .ok_or_else(|| TcnError::parse(&name, "end of file", "missing feature_dim line"))?;
        Ok(DatasetManifest {
            classes,
            feature_dim,
            sequences,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = String::new();
        text.push_str(&format!("classes={}\n", self.classes.join(",")));
        text.push_str(&format!("feature_dim={}\n", self.feature_dim));
        for rec in &self.sequences {
            text.push_str(&format!(
                "seq={} {} {}\n",
                rec.features, rec.labels, rec.split
            ));
        }
        fs::write(path, text)
            .map_err(|e| TcnError::data(format!("cannot write {}: {e}", path.display())))
    }

    /// Loads every sequence of one split, checking feature width and label
    /// range against the manifest header.
    pub fn load_split(
        &self,
        base: impl AsRef<Path>,
        split: Split,
    ) -> Result<Vec<LabelledSequence>> {
        let base = base.as_ref();
        let mut out = Vec::new();
        for rec in self.sequences.iter().filter(|r| r.split == split) {
            let x = read_features(base.join(&rec.features))?;
            let y = read_labels(base.join(&rec.labels))?;
            if x.channels() != self.feature_dim {
                return Err(TcnError::data(format!(
                    "{}: {} feature channels, manifest says {}",
                    rec.features,
                    x.channels(),
                    self.feature_dim
                )));
            }
            if x.frames() != y.len() {
                return Err(TcnError::data(format!(
                    "{}: {} frames but {} has {} labels",
                    rec.features,
                    x.frames(),
                    rec.labels,
                    y.len()
                )));
            }
            if let Some(&bad) = y.iter().find(|&&c| c >= self.classes.len()) {
                return Err(TcnError::data(format!(
                    "{}: class id {} out of range for {} classes",
                    rec.labels,
                    bad,
                    self.classes.len()
                )));
            }
            out.push((x, y));
        }
        Ok(out)
    }
}

/// Writes a train/test dataset under `dir` (one features + labels file pair
/// per sequence, plus `manifest.txt`) and returns the manifest.
pub fn write_split_dataset(
    dir: impl AsRef<Path>,
    train: &[LabelledSequence],
    test: &[LabelledSequence],
    classes: &[String],
    binary: bool,
) -> Result<DatasetManifest> {
    let dir = dir.as_ref();
    let feature_dim = train
        .first()
        .or_else(|| test.first())
        .map(|(x, _)| x.channels())
        .ok_or_else(|| TcnError::data("dataset has no sequences"))?;
    let ext = if binary { "tcnf" } else { "csv" };
    let mut sequences = Vec::new();
    for (split, seqs) in [(Split::Train, train), (Split::Test, test)] {
        let sub = dir.join(split.as_str());
        fs::create_dir_all(&sub)
            .map_err(|e| TcnError::data(format!("cannot create {}: {e}", sub.display())))?;
        for (i, (x, y)) in seqs.iter().enumerate() {
            let features = format!("{split}/seq_{i:03}.{ext}");
            let labels = format!("{split}/seq_{i:03}.labels");
            if binary {
                write_features_binary(x, dir.join(&features))?;
            } else {
                write_features_csv(x, dir.join(&features))?;
            }
            write_labels(y, dir.join(&labels))?;
            sequences.push(SequenceRecord {
                features,
                labels,
                split,
            });
        }
    }
    let manifest = DatasetManifest {
        classes: classes.to_vec(),
        feature_dim,
        sequences,
    };
    manifest.write(dir.join("manifest.txt"))?;
    Ok(manifest)
}
