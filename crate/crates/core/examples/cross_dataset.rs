//! Train on one cohort and evaluate on another, here two halves of a
//! synthetic dataset.

use histocell::experiments::{cross_dataset, generate_synthetic, Dataset, RunOptions, SyntheticSpec};
use histocell::regressor::TrainConfig;

fn main() -> histocell::Result<()> {
    let (spots, abundances) = generate_synthetic(&SyntheticSpec {
        n_patients: 4,
        spots_per_patient: 300,
        ..SyntheticSpec::default()
    })?;
    let all = Dataset::new(spots, abundances)?;
    let patients = all.spots.patients();
    let rows = |ids: &[&str]| -> Vec<usize> { ids.iter().flat_map(|p| patients[*p].clone()).collect() };
    let cohort_a = all.subset(&rows(&["P01", "P02"]));
    let cohort_b = all.subset(&rows(&["P03", "P04"]));

    let opts = RunOptions {
        train: TrainConfig {
            hidden_width: 64,
            epochs: 40,
            batch_size: 64,
            ..TrainConfig::default()
        },
        spatial: Default::default(),
        eval: Default::default(),
    };
    let report = cross_dataset(&cohort_a, &cohort_b, &opts)?;
    for s in &report.samples {
        if let Some(e) = &s.eval {
            println!("{}: mean CC {:.3} L1 {:.3}", s.sample_id, e.mean_cc, e.l1);
        }
    }
    println!(
        "pooled: mean CC {:.3} L1 {:.3}, colocalization cosine {:.3}",
        report.pooled.mean_cc,
        report.pooled.l1,
        report.comparison.map_or(f64::NAN, |c| c.cosine)
    );
    Ok(())
}
