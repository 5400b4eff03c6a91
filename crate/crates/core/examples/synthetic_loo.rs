//! Leave-one-patient-out cross-validation on a synthetic dataset.
//!
//! ```text
//! cargo run --release --example synthetic_loo -- [output_dir]
//! ```

use std::path::PathBuf;

use histocell::experiments::{run_loo, write_synthetic, ExperimentConfig, SyntheticSpec};
use histocell::regressor::TrainConfig;

fn main() -> histocell::Result<()> {
    env_logger::init();
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("histocell-synthetic-loo"));

    let spec = SyntheticSpec {
        n_patients: 3,
        spots_per_patient: 600,
        dim: 32,
        n_cell_types: 6,
        ..SyntheticSpec::default()
    };
    let (spots, abundances) = write_synthetic(&spec, out.join("data"))?;

    let mut cfg = ExperimentConfig {
        name: "loo".into(),
        out_dir: out.clone(),
        workers: 3,
        train: TrainConfig {
            hidden_width: 64,
            epochs: 40,
            ..TrainConfig::default()
        },
        ..ExperimentConfig::default()
    };
    cfg.data.spots = spots;
    cfg.data.abundances = abundances;

    for fold in run_loo(&cfg)? {
        match fold.result {
            Ok(r) => println!(
                "{}: mean CC {:.3}, L1 {:.3} (mean predictor {:.3})",
                fold.fold,
                r.pooled.mean_cc,
                r.pooled.l1,
                r.baseline_l1.unwrap_or(f64::NAN)
            ),
            Err(e) => println!("{}: failed: {e}", fold.fold),
        }
    }
    println!("summary: {}", cfg.experiment_dir().join("summary.csv").display());
    Ok(())
}
