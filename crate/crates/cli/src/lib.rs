//! Batch front-end for the toolkit: one JSON config per run, one task per
//! command, three artifacts per run (data.csv, summary.json, manifest.json).

pub mod config;
pub mod report;
pub mod tasks;

use std::path::{Path, PathBuf};

use arcext_core::Result;

/// Command-line surface: `arcext <command> --config <path> [--out <dir>] [--seed <n>]`.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: String,
    pub config_path: PathBuf,
    pub out_override: Option<PathBuf>,
    pub seed_override: Option<u64>,
}

/// Loads the config, resolves overrides, dispatches the named task from the
/// registry, and writes the artifacts. Returns the output directory.
pub fn run(invocation: &Invocation) -> Result<PathBuf> {
    let resolved = config::load(invocation)?;
    let registry = tasks::registry();
    let task = registry
        .iter()
        .find(|t| t.name() == resolved.command)
        .ok_or_else(|| {
            arcext_core::Error::invalid(format!(
                "config error: unknown command {:?}; known commands: {}",
                resolved.command,
                registry
                    .iter()
                    .map(|t| t.name())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?;
    let output = task.run(&resolved)?;
    report::write_artifacts(&resolved, output)?;
    Ok(resolved.out_dir.clone())
}

/// Maps an error to the short machine-readable kind used in the structured
/// stderr report.
pub fn error_kind(err: &arcext_core::Error) -> &'static str {
    use arcext_core::Error::*;
    match err {
        Invalid(_) => "config",
        Scaling(_) => "config",
        GridMismatch(_) => "grid-mismatch",
        Budget { .. } => "resource",
        ZeroNorm(_) => "zero-norm",
        NonFinite { .. } => "non-finite",
        SingularTorsion { .. } => "singular-torsion",
    }
}

/// Hex SHA-256 of a file, as recorded in the manifest.
pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}
