//! File emission: atomic writes, deterministic CSV formatting, and the
//! JSON run manifest with content hashes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ResolvedConfig;
use crate::CliResult;

/// Shortest round-trip decimal for a float; empty for a missing value.
pub fn fmt_float(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

/// Write bytes atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// A run in progress: collects emitted files and finalizes the manifest.
pub struct RunWriter {
    out_dir: PathBuf,
    files: Vec<FileRecord>,
    started: Instant,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    artifact_version: &'static str,
    experiment: &'a str,
    config: &'a ResolvedConfig,
    master_seed: u64,
    child_seeds: &'a [u64],
    checkpoints: &'a [usize],
    complete: bool,
    wall_clock_seconds: f64,
    files: &'a [FileRecord],
}

impl RunWriter {
    pub fn new(out_dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(RunWriter {
            out_dir: out_dir.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Emit one file atomically and record its hash.
    pub fn emit(&mut self, name: &str, content: &str) -> CliResult<()> {
        let bytes = content.as_bytes();
        atomic_write(&self.out_dir.join(name), bytes)?;
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        self.files.push(FileRecord {
            name: name.to_string(),
            sha256: format!("{:x}", hasher.finalize()),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// Write `manifest.json`. `complete = false` marks a run whose outputs
    /// are partial (an error interrupted it).
    pub fn finalize(
        &mut self,
        config: &ResolvedConfig,
        child_seeds: &[u64],
        checkpoints: &[usize],
        complete: bool,
    ) -> CliResult<()> {
        let manifest = Manifest {
            artifact_version: env!("CARGO_PKG_VERSION"),
            experiment: config.experiment.label(),
            config,
            master_seed: config.seed,
            child_seeds,
            checkpoints,
            complete,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            files: &self.files,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| crate::CliError::io(format!("manifest serialization: {e}")))?;
        atomic_write(&self.out_dir.join("manifest.json"), text.as_bytes())?;
        Ok(())
    }
}

/// Build a CSV from a header and row formatter, with `\n` line endings.
pub fn csv_document(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut doc = String::with_capacity(1 << 16);
    doc.push_str(header);
    doc.push('\n');
    for row in rows {
        doc.push_str(&row);
        doc.push('\n');
    }
    doc
}
