//! Run manifest: the config echo, wall time and a checksum per artifact.
//! It is written after every artifact, so its presence marks a complete run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::experiments::{execute, Outcome};
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    /// Relative to the manifest's directory.
    pub path: String,
    pub role: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: String,
    pub seed: u64,
    pub config: Value,
    pub wall_time_seconds: f64,
    pub artifacts: Vec<ArtifactRecord>,
    #[serde(default)]
    pub summary: Value,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("malformed manifest {}: {e}", path.display())))
    }

    pub fn artifact(&self, role: &str) -> Option<&ArtifactRecord> {
        self.artifacts.iter().find(|a| a.role == role)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Runs the experiment and persists its artifacts followed by the manifest.
/// Returns the manifest and the path it was written to.
pub fn run(config: &ExperimentConfig) -> Result<(Manifest, PathBuf), CliError> {
    let start = Instant::now();
    let Outcome { artifacts, summary } = execute(&config.experiment, config.seed)?;

    let dir = &config.output_dir;
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("output_dir: cannot create {}: {e}", dir.display())))?;
    let mut records = Vec::with_capacity(artifacts.len());
    for a in &artifacts {
        write_file(&dir.join(&a.file_name), &a.bytes)?;
        records.push(ArtifactRecord {
            path: a.file_name.clone(),
            role: a.role.clone(),
            sha256: sha256_hex(&a.bytes),
            bytes: a.bytes.len() as u64,
        });
    }
    let manifest = Manifest {
        kind: config.experiment.kind().to_string(),
        seed: config.seed,
        config: config.raw.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        artifacts: records,
        summary,
    };
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    Ok((manifest, path))
}
