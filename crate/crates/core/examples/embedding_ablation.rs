//! Concatenating embeddings from several encoders, compared with each
//! encoder alone, under leave-one-patient-out evaluation.

use histocell::dataset::{concat_embeddings, EmbeddingBlock};
use histocell::experiments::{generate_synthetic, loo_folds, Dataset, RunOptions, SyntheticSpec};
use histocell::regressor::TrainConfig;
use ndarray::s;

fn mean_cc(data: &Dataset, opts: &RunOptions) -> histocell::Result<f64> {
    let folds = loo_folds(data, opts, 3)?;
    let ccs: Vec<f64> = folds.iter().filter_map(|f| f.result.as_ref().ok()).map(|r| r.pooled.mean_cc).collect();
    Ok(ccs.iter().sum::<f64>() / ccs.len() as f64)
}

fn main() -> histocell::Result<()> {
    let (spots, abundances) = generate_synthetic(&SyntheticSpec {
        spots_per_patient: 400,
        dim: 24,
        ..SyntheticSpec::default()
    })?;
    let ids = spots.spot_ids().to_vec();
    let z = spots.embeddings();
    // pretend the first and second halves come from two different encoders
    let a = EmbeddingBlock::new("encoder_a", ids.clone(), z.slice(s![.., ..12]).to_owned())?;
    let b = EmbeddingBlock::new("encoder_b", ids, z.slice(s![.., 12..]).to_owned())?;
    let both = concat_embeddings(&[a.clone(), b.clone()])?;

    let opts = RunOptions {
        train: TrainConfig {
            hidden_width: 48,
            epochs: 40,
            batch_size: 64,
            ..TrainConfig::default()
        },
        spatial: Default::default(),
        eval: Default::default(),
    };
    for block in [&a, &b, &both] {
        let data = Dataset::new(
            spots.with_embeddings(block.aligned_to(spots.spot_ids())?)?,
            abundances.clone(),
        )?;
        println!("{:<20} D={:<3} LOO mean CC {:.3}", block.source_name, block.dim(), mean_cc(&data, &opts)?);
    }
    Ok(())
}
