//! End-to-end commands: configuration files, run manifests, and the
//! functions behind each CLI subcommand.

pub mod commands;
pub mod compare;
pub mod config;
pub mod manifest;

pub use commands::*;
pub use compare::{cmd_compare, CompareReport, ExperimentConfig, RegimeRow, RegimeSpec};
pub use config::{parse_entries, train_config_pairs, Entry, TrainFile};
pub use manifest::{sha256_hex, FileDigest, RunManifest};
