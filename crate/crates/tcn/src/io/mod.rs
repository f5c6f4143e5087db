//! File formats: feature sequences (text CSV or TCNF binary), label files,
//! dataset manifests, and run configuration.

mod config;
mod features;
mod labels;
mod manifest;

pub use config::{parse_tau_list, ModelKind, RunConfig};
pub use features::{read_features, write_features_binary, write_features_csv};
pub use labels::{read_labels, write_labels};
pub use manifest::{write_split_dataset, DatasetManifest, SequenceRecord, Split};
