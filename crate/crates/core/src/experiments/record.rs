//! Provenance record written next to every run's artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentConfig;
use crate::error::{Error, Result};

pub const RUN_RECORD_FILE: &str = "run.json";

/// Resolved configuration, command and artifact hashes of one run. The file
/// is accepted back as `--config`, which reproduces the same artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub command: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    /// SHA-256 of every file below the output directory, keyed by relative
    /// path with `/` separators.
    pub artifacts: BTreeMap<String, String>,
}

impl RunRecord {
    pub fn new(command: &str, config: &ExperimentConfig, dir: &Path) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            seed: config.train.seed,
            config: config.clone(),
            artifacts: hash_artifacts(dir)?,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(RUN_RECORD_FILE);
        let text = serde_json::to_string_pretty(self).expect("record serializes") + "\n";
        crate::dataset::io::write_all(&path, &text)?;
        Ok(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Hashes all files below `dir` except run records.
pub fn hash_artifacts(dir: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    if dir.is_dir() {
        walk(dir, dir, &mut out)?;
    }
    Ok(out)
}

fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            walk(root, &path, out)?;
            continue;
        }
        if path.file_name().is_some_and(|n| n == RUN_RECORD_FILE) {
            continue;
        }
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        let rel = path
            .strip_prefix(root)
            .expect("walked below root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        out.insert(rel, hex);
    }
    Ok(())
}
