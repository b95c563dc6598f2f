//! Config-driven experiments over `nonlocal-core`: one JSON file in, a JSON
//! summary and CSV tables out.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod sweep;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, Kind};
pub use error::LabError;
pub use run::{execute, Artifacts};

/// Loads `path`, runs it and writes the artifacts to `out` (default: the
/// config's directory) under the config's file stem. Returns the written
/// paths.
pub fn run_config(path: &Path, kind: Option<Kind>, out: Option<&Path>, gnuplot: bool) -> Result<Vec<PathBuf>, LabError> {
    let cfg = ExperimentConfig::load(path)?;
    let kind = cfg.resolve_kind(kind)?;
    let art = execute(&cfg, kind)?;
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
    output::write_artifacts(&art, &dir, stem, gnuplot)
}
