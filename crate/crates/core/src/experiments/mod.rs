//! End-to-end experiments: leave-one-patient-out and cross-dataset runs, the
//! JSON experiment configuration, run records and synthetic data.
//!
//! Output layout for an experiment named `name`:
//!
//! ```text
//! <out_dir>/<name>/run.json
//! <out_dir>/<name>/summary.csv
//! <out_dir>/<name>/<fold>/report.csv
//! <out_dir>/<name>/<fold>/predictions.csv
//! <out_dir>/<name>/<fold>/model.ckpt
//! <out_dir>/<name>/<fold>/history.csv
//! <out_dir>/<name>/<fold>/coloc_<sample>_truth.csv
//! <out_dir>/<name>/<fold>/coloc_<sample>_pred.csv
//! <out_dir>/<name>/<fold>/coloc_<sample>.svg
//! <out_dir>/<name>/<fold>/coloc_<sample>_truth.svg
//! ```
//!
//! A fold that fails writes `error.txt` instead of the artifacts above.

mod record;
mod report;
mod runner;
mod synthetic;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{load_abundance_table, load_spot_table_with_blocks, AbundanceMatrix, SpotTable};
use crate::error::{Error, Result};
use crate::patchprep::{filter_spots, load_fractions, DEFAULT_MAX_BACKGROUND};
use crate::regressor::TrainConfig;
use crate::spatial::SpatialConfig;

pub use record::{hash_artifacts, RunRecord, RUN_RECORD_FILE};
pub use report::{recompute_summary, report_csv, summary_csv, REPORT_HEADER, SUMMARY_HEADER};
pub use runner::{
    assess, cross_dataset, evaluate_fold, loo_folds, run_cross_dataset, run_fold, run_loo, write_fold, FoldOutcome,
    FoldReport, RunOptions, SampleReport,
};
pub use synthetic::{generate_synthetic, write_synthetic, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Loo,
    Cross,
}

/// Input files of one dataset. Paths are resolved against the working
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub spots: PathBuf,
    pub abundances: PathBuf,
    /// Extra embedding blocks, concatenated in order when the spot table has
    /// no inline embedding columns.
    pub embeddings: Vec<PathBuf>,
    /// Optional `spot_id,background_fraction` table used to drop background
    /// spots before anything else.
    pub fractions: Option<PathBuf>,
}

impl DataPaths {
    pub fn is_set(&self) -> bool {
        !self.spots.as_os_str().is_empty() && !self.abundances.as_os_str().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Compare per-spot proportions instead of raw abundances.
    pub normalize: bool,
    /// Set negative predictions to zero.
    pub clamp: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            normalize: false,
            clamp: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatchConfig {
    pub max_background: f64,
}

impl Default for PatchConfig {
    fn default() -> Self {
        Self {
            max_background: DEFAULT_MAX_BACKGROUND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub mode: Mode,
    pub data: DataPaths,
    /// Evaluation dataset of a cross-dataset run.
    pub test_data: DataPaths,
    pub train: TrainConfig,
    pub spatial: SpatialConfig,
    pub eval: EvalConfig,
    pub patch: PatchConfig,
    /// Used by the `synth` command only.
    pub synth: SyntheticSpec,
    pub out_dir: PathBuf,
    /// Folds run concurrently on this many threads.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            mode: Mode::Loo,
            data: DataPaths::default(),
            test_data: DataPaths::default(),
            train: TrainConfig::default(),
            spatial: SpatialConfig::default(),
            eval: EvalConfig::default(),
            patch: PatchConfig::default(),
            synth: SyntheticSpec::default(),
            out_dir: PathBuf::from("out"),
            workers: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads either a config file or a run record written by an earlier run.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let value = match value {
            serde_json::Value::Object(mut map) if map.contains_key("artifacts") && map.contains_key("config") => {
                map.remove("config").unwrap_or_default()
            }
            v => v,
        };
        serde_json::from_value(value).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Applies `key=value` overrides. Keys are dotted paths that must already
    /// exist in the serialized config; values are read as JSON and fall back
    /// to plain strings. The result is re-checked against the schema.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut root = serde_json::to_value(self).expect("config serializes");
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {item:?} is not key=value")))?;
            let mut node = &mut root;
            for part in key.split('.') {
                node = node
                    .as_object_mut()
                    .and_then(|m| m.get_mut(part))
                    .ok_or_else(|| Error::Config(format!("unknown config key {key:?}")))?;
            }
            *node = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            serde_json::from_value::<Self>(root.clone())
                .map_err(|e| Error::Config(format!("override {item:?}: {e}")))?;
        }
        serde_json::from_value(root).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name == "." || self.name == ".." {
            return Err(Error::Config(format!("invalid experiment name {:?}", self.name)));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if !(self.patch.max_background >= 0.0 && self.patch.max_background <= 1.0) {
            return Err(Error::Config("patch.max_background must lie in [0, 1]".into()));
        }
        if matches!(self.spatial.length_scale, Some(l) if !(l > 0.0 && l.is_finite())) {
            return Err(Error::Config("spatial.length_scale must be positive".into()));
        }
        if !(self.spatial.nn_multiplier > 0.0 && self.spatial.nn_multiplier.is_finite()) {
            return Err(Error::Config("spatial.nn_multiplier must be positive".into()));
        }
        self.train.validate()?;
        Ok(())
    }

    /// Checks the fields the given mode needs.
    pub fn validate_for(&self, mode: Mode) -> Result<()> {
        self.validate()?;
        if !self.data.is_set() {
            return Err(Error::Config("data.spots and data.abundances are required".into()));
        }
        if mode == Mode::Cross && !self.test_data.is_set() {
            return Err(Error::Config("cross mode needs test_data.spots and test_data.abundances".into()));
        }
        Ok(())
    }

    pub fn experiment_dir(&self) -> PathBuf {
        self.out_dir.join(&self.name)
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            train: self.train.clone(),
            spatial: self.spatial.clone(),
            eval: self.eval,
        }
    }
}

/// A spot table with its aligned abundance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spots: SpotTable,
    pub abundances: AbundanceMatrix,
}

impl Dataset {
    pub fn new(spots: SpotTable, abundances: AbundanceMatrix) -> Result<Self> {
        if spots.spot_ids() != abundances.spot_ids() {
            return Err(Error::Shape("abundance rows are not aligned with the spot table".into()));
        }
        Ok(Self { spots, abundances })
    }

    /// Loads the files of `paths`, dropping background spots when a
    /// fractions table is given.
    pub fn load(paths: &DataPaths, patch: &PatchConfig) -> Result<Self> {
        let mut spots = load_spot_table_with_blocks(&paths.spots, &paths.embeddings)?;
        if let Some(fr) = &paths.fractions {
            let fractions: HashMap<String, f64> = load_fractions(fr)?;
            spots = filter_spots(&spots, &fractions, patch.max_background)?;
            log::info!("{} spots kept after background filtering", spots.len());
        }
        let abundances = load_abundance_table(&paths.abundances, &spots)?;
        Self::new(spots, abundances)
    }

    pub fn len(&self) -> usize {
        self.spots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spots.is_empty()
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            spots: self.spots.subset(rows),
            abundances: self.abundances.subset(rows),
        }
    }
}

/// File-name-safe form of an identifier, used for fold and sample file names.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}
