use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;

use super::report::{report_csv, summary_csv};
use super::{file_stem, Dataset, ExperimentConfig, Mode};
use crate::dataset::{describe_diff, make_splits, write_abundance_table, AbundanceMatrix, SplitMode};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, l1_score_values, EvalReport};
use crate::regressor::{fit, predict, save_checkpoint, MlpModel, TrainConfig};
use crate::spatial::{
    average_coloc, colocalization_from_coords, compare_colocalization, render_heatmap, upgma_order, ColocComparison,
    ColocMatrix, SpatialConfig,
};

use super::EvalConfig;

/// Everything a fold needs besides its data.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub train: TrainConfig,
    pub spatial: SpatialConfig,
    pub eval: EvalConfig,
}

/// Results for one held-out sample.
#[derive(Debug, Clone)]
pub struct SampleReport {
    pub sample_id: String,
    pub n_spots: usize,
    /// `None` when the sample is too small or has no varying cell type.
    pub eval: Option<EvalReport>,
    pub baseline_l1: Option<f64>,
    /// Truth and predicted colocalization, when both could be computed.
    pub coloc: Option<(ColocMatrix, ColocMatrix)>,
    pub comparison: Option<ColocComparison>,
}

/// Results of one train/test split.
#[derive(Debug, Clone)]
pub struct FoldReport {
    pub fold: String,
    pub model: MlpModel,
    pub history: Vec<f64>,
    pub predictions: AbundanceMatrix,
    pub samples: Vec<SampleReport>,
    pub pooled: EvalReport,
    /// L1 of predicting the training mean for every spot.
    pub baseline_l1: Option<f64>,
    /// Spot-weighted average colocalization over samples, compared.
    pub comparison: Option<ColocComparison>,
}

#[derive(Debug)]
pub struct FoldOutcome {
    pub fold: String,
    pub n_test_spots: usize,
    pub result: Result<FoldReport>,
}

impl FoldOutcome {
    pub fn is_ok(&self) -> bool {
        self.result.is_ok()
    }
}

fn mean_baseline(means: &Array1<f64>, truth: &AbundanceMatrix, normalize: bool) -> Result<f64> {
    let pred = Array2::from_shape_fn(truth.values().dim(), |(_, c)| means[c]);
    l1_score_values(pred.view(), truth.values(), normalize)
}

/// Predicts `test` with a trained model and scores it per sample and pooled.
/// `train_means` enables the constant-mean baseline.
pub fn assess(
    fold: &str,
    model: MlpModel,
    history: Vec<f64>,
    test: &Dataset,
    train_means: Option<&Array1<f64>>,
    opts: &RunOptions,
) -> Result<FoldReport> {
    if model.cell_types.as_slice() != test.abundances.cell_types() {
        return Err(Error::Shape(format!(
            "model and test cell types differ: {}",
            describe_diff(&model.cell_types, test.abundances.cell_types())
        )));
    }
    let normalize = opts.eval.normalize;
    let predictions = predict(&model, &test.spots, opts.eval.clamp)?;
    let pooled = evaluate("*", &predictions, &test.abundances, normalize)?;
    let baseline_l1 = train_means
        .map(|m| mean_baseline(m, &test.abundances, normalize))
        .transpose()?;

    let mut samples = Vec::new();
    for (sample, rows) in test.spots.samples() {
        let truth = test.abundances.subset(&rows);
        let pred = predictions.subset(&rows);
        let eval = match evaluate(sample, &pred, &truth, normalize) {
            Ok(r) => Some(r),
            Err(e) => {
                log::warn!("fold {fold}: sample {sample} not scored: {e}");
                None
            }
        };
        let baseline = train_means.and_then(|m| mean_baseline(m, &truth, normalize).ok());
        let coloc = sample_coloc(sample, &pred, &truth, test.spots.subset(&rows).coords(), &opts.spatial);
        let (coloc, comparison) = match coloc {
            Ok(pair) => {
                let cmp = compare_colocalization(&pair.1, &pair.0).ok();
                (Some(pair), cmp)
            }
            Err(e) => {
                log::warn!("fold {fold}: no colocalization for sample {sample}: {e}");
                (None, None)
            }
        };
        samples.push(SampleReport {
            sample_id: sample.to_string(),
            n_spots: rows.len(),
            eval,
            baseline_l1: baseline,
            coloc,
            comparison,
        });
    }

    let (truths, preds, weights) = samples.iter().filter_map(|s| s.coloc.as_ref().map(|c| (s, c))).fold(
        (Vec::new(), Vec::new(), Vec::new()),
        |(mut t, mut p, mut w), (s, (ct, cp))| {
            t.push(ct.clone());
            p.push(cp.clone());
            w.push(s.n_spots as f64);
            (t, p, w)
        },
    );
    let comparison = if truths.is_empty() {
        None
    } else {
        compare_colocalization(&average_coloc(&preds, &weights)?, &average_coloc(&truths, &weights)?).ok()
    };

    Ok(FoldReport {
        fold: fold.to_string(),
        model,
        history,
        predictions,
        samples,
        pooled,
        baseline_l1,
        comparison,
    })
}

fn sample_coloc(
    sample: &str,
    pred: &AbundanceMatrix,
    truth: &AbundanceMatrix,
    coords: ndarray::ArrayView2<f64>,
    spatial: &SpatialConfig,
) -> Result<(ColocMatrix, ColocMatrix)> {
    let l = spatial.length_scale_for(coords)?;
    let t = colocalization_from_coords(truth, coords, l, format!("{sample} truth"))?;
    let p = colocalization_from_coords(pred, coords, l, format!("{sample} predicted"))?;
    Ok((t, p))
}

fn check_compatible(train: &Dataset, test: &Dataset) -> Result<()> {
    if train.abundances.cell_types() != test.abundances.cell_types() {
        return Err(Error::Shape(format!(
            "training and test cell types differ: {}",
            describe_diff(train.abundances.cell_types(), test.abundances.cell_types())
        )));
    }
    if train.spots.dim() != test.spots.dim() {
        return Err(Error::Shape(format!(
            "embedding dimension {} in training data but {} in test data",
            train.spots.dim(),
            test.spots.dim()
        )));
    }
    Ok(())
}

/// Trains on `train` and assesses on `test`.
pub fn evaluate_fold(fold: &str, train: &Dataset, test: &Dataset, opts: &RunOptions) -> Result<FoldReport> {
    check_compatible(train, test)?;
    let outcome = fit(
        train.spots.embeddings(),
        train.abundances.values(),
        train.abundances.cell_types().to_vec(),
        &opts.train,
    )?;
    let means = train.abundances.values().mean_axis(Axis(0)).expect("non-empty training set");
    assess(fold, outcome.model, outcome.history, test, Some(&means), opts)
}

/// One model on all of `train`, evaluated on all of `test`.
pub fn cross_dataset(train: &Dataset, test: &Dataset, opts: &RunOptions) -> Result<FoldReport> {
    evaluate_fold("cross", train, test, opts)
}

/// Runs every leave-one-patient-out fold in memory on `workers` threads.
/// Folds are returned in patient order whatever the thread count.
pub fn loo_folds(data: &Dataset, opts: &RunOptions, workers: usize) -> Result<Vec<FoldOutcome>> {
    run_folds(data, opts, workers, &|_| Ok(()))
}

/// Like [`loo_folds`], handing each fold to `sink` as soon as it finishes.
fn run_folds(
    data: &Dataset,
    opts: &RunOptions,
    workers: usize,
    sink: &(dyn Fn(&FoldOutcome) -> Result<()> + Sync),
) -> Result<Vec<FoldOutcome>> {
    let splits = make_splits(&data.spots, &SplitMode::LeaveOnePatientOut)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| {
        splits
            .par_iter()
            .map(|split| {
                log::info!("fold {}: {} train / {} test spots", split.name, split.train.len(), split.test.len());
                let result = evaluate_fold(&split.name, &data.subset(&split.train), &data.subset(&split.test), opts);
                if let Err(e) = &result {
                    log::error!("fold {} failed: {e}", split.name);
                }
                let outcome = FoldOutcome {
                    fold: split.name.clone(),
                    n_test_spots: split.test.len(),
                    result,
                };
                sink(&outcome)?;
                Ok(outcome)
            })
            .collect()
    })
}

/// Writes a fold's artifacts into `dir`, replacing earlier contents.
pub fn write_fold(outcome: &FoldOutcome, dir: &Path) -> Result<()> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let report = match &outcome.result {
        Ok(r) => r,
        Err(e) => {
            let path = dir.join("error.txt");
            let text = format!("fold,{}\nn_test_spots,{}\n{e}\n", outcome.fold, outcome.n_test_spots);
            return fs::write(&path, text).map_err(|e| Error::io(&path, e));
        }
    };
    save_checkpoint(&report.model, dir.join("model.ckpt"))?;
    write_abundance_table(&report.predictions, dir.join("predictions.csv"))?;
    let mut history = String::from("epoch,loss\n");
    for (i, l) in report.history.iter().enumerate() {
        history.push_str(&format!("{},{l:?}\n", i + 1));
    }
    crate::dataset::io::write_all(&dir.join("history.csv"), &history)?;
    crate::dataset::io::write_all(&dir.join("report.csv"), &report_csv(report))?;
    for s in &report.samples {
        if let Some((truth, pred)) = &s.coloc {
            let stem = file_stem(&s.sample_id);
            truth.save_csv(dir.join(format!("coloc_{stem}_truth.csv")))?;
            pred.save_csv(dir.join(format!("coloc_{stem}_pred.csv")))?;
            let order = upgma_order(truth);
            crate::dataset::io::write_all(&dir.join(format!("coloc_{stem}.svg")), &render_heatmap(pred, &order)?)?;
            crate::dataset::io::write_all(
                &dir.join(format!("coloc_{stem}_truth.svg")),
                &render_heatmap(truth, &order)?,
            )?;
        }
    }
    Ok(())
}

fn write_summary(cfg: &ExperimentConfig, outcomes: &[FoldOutcome]) -> Result<()> {
    crate::dataset::io::write_all(&cfg.experiment_dir().join("summary.csv"), &summary_csv(outcomes))
}

/// Loads the configured dataset and runs all folds. Each fold's directory is
/// written as soon as that fold finishes; `summary.csv` is written once all
/// folds are done, so an interrupted run leaves only complete folds behind.
pub fn run_loo(cfg: &ExperimentConfig) -> Result<Vec<FoldOutcome>> {
    cfg.validate_for(Mode::Loo)?;
    let data = Dataset::load(&cfg.data, &cfg.patch)?;
    let exp = cfg.experiment_dir();
    let outcomes = run_folds(&data, &cfg.run_options(), cfg.workers, &|o| {
        write_fold(o, &exp.join(file_stem(&o.fold)))
    })?;
    write_summary(cfg, &outcomes)?;
    Ok(outcomes)
}

/// Re-runs a single leave-one-patient-out fold and rewrites its directory.
/// `summary.csv` is left untouched.
pub fn run_fold(cfg: &ExperimentConfig, patient: &str) -> Result<FoldOutcome> {
    cfg.validate_for(Mode::Loo)?;
    let data = Dataset::load(&cfg.data, &cfg.patch)?;
    let split = make_splits(&data.spots, &SplitMode::LeaveOnePatientOut)?
        .into_iter()
        .find(|s| s.name == patient)
        .ok_or_else(|| Error::invalid(format!("no patient {patient:?} in the dataset")))?;
    let result = evaluate_fold(
        &split.name,
        &data.subset(&split.train),
        &data.subset(&split.test),
        &cfg.run_options(),
    );
    let outcome = FoldOutcome {
        fold: split.name.clone(),
        n_test_spots: split.test.len(),
        result,
    };
    write_fold(&outcome, &cfg.experiment_dir().join(file_stem(&outcome.fold)))?;
    Ok(outcome)
}

/// Trains on `cfg.data`, evaluates on `cfg.test_data` and writes the
/// artifacts under the fold name `cross`.
pub fn run_cross_dataset(cfg: &ExperimentConfig) -> Result<FoldOutcome> {
    cfg.validate_for(Mode::Cross)?;
    let train = Dataset::load(&cfg.data, &cfg.patch)?;
    let test = Dataset::load(&cfg.test_data, &cfg.patch)?;
    check_compatible(&train, &test)?;
    let result = cross_dataset(&train, &test, &cfg.run_options());
    let outcome = FoldOutcome {
        fold: "cross".into(),
        n_test_spots: test.len(),
        result,
    };
    write_fold(&outcome, &cfg.experiment_dir().join(file_stem(&outcome.fold)))?;
    write_summary(cfg, std::slice::from_ref(&outcome))?;
    Ok(outcome)
}
