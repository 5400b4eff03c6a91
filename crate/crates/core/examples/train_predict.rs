//! Train the regressor on two patients, save and reload the checkpoint, and
//! score the third patient.

use histocell::experiments::{generate_synthetic, SyntheticSpec};
use histocell::metrics::evaluate;
use histocell::regressor::{fit, load_checkpoint, predict, save_checkpoint, TrainConfig};
use ndarray::Axis;

fn main() -> histocell::Result<()> {
    let (spots, abundances) = generate_synthetic(&SyntheticSpec {
        spots_per_patient: 500,
        ..SyntheticSpec::default()
    })?;
    let patients = spots.patients();
    let test_rows = patients["P03"].clone();
    let train_rows: Vec<usize> = (0..spots.len()).filter(|i| !test_rows.contains(i)).collect();

    let cfg = TrainConfig {
        hidden_width: 64,
        epochs: 60,
        batch_size: 128,
        ..TrainConfig::default()
    };
    let x = spots.embeddings().select(Axis(0), &train_rows);
    let y = abundances.values().select(Axis(0), &train_rows);
    let outcome = fit(x.view(), y.view(), abundances.cell_types().to_vec(), &cfg)?;
    println!(
        "{} parameters, loss {:.4} -> {:.4}",
        outcome.model.n_params(),
        outcome.history[0],
        outcome.history[outcome.history.len() - 1]
    );

    let path = std::env::temp_dir().join("histocell-model.ckpt");
    save_checkpoint(&outcome.model, &path)?;
    let model = load_checkpoint(&path)?;

    let test_spots = spots.subset(&test_rows);
    let pred = predict(&model, &test_spots, true)?;
    let report = evaluate("P03", &pred, &abundances.subset(&test_rows), false)?;
    for (ct, cc) in report.cell_types.iter().zip(&report.per_cell_type_cc) {
        println!("{ct}: CC {}", cc.map_or("undefined".into(), |v| format!("{v:.3}")));
    }
    println!("held-out mean CC {:.3}, L1 {:.3}", report.mean_cc, report.l1);
    Ok(())
}
