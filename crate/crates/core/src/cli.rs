//! Command-line front end. Exit codes: 0 on success, 1 on validation or
//! metric failures, 2 on I/O or configuration errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::Axis;

use crate::dataset::{load_predictions, load_spot_table_with_blocks, load_abundance_table, scan_dataset};
use crate::error::{Error, Result};
use crate::experiments::{
    assess, run_cross_dataset, run_fold, run_loo, write_fold, write_synthetic, Dataset, ExperimentConfig, FoldOutcome,
    Mode, RunRecord,
};
use crate::patchprep::{fractions_from_dir, write_fractions, DEFAULT_WHITE_THRESHOLD};
use crate::regressor::{fit, load_checkpoint, save_checkpoint};
use crate::spatial::{
    average_coloc, colocalization_from_coords, compare_colocalization, render_heatmap, upgma_order,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "histocell", version, about = "Cell-type abundance regression from histology embeddings")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ConfigArgs {
    /// Experiment config or an earlier run.json.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config value, e.g. `--set train.lambda2=0`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output root directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Seed for training and synthetic data.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a spots/abundances pair and list every problem found.
    Validate {
        #[arg(long)]
        spots: PathBuf,
        #[arg(long)]
        abundances: PathBuf,
    },
    /// Train one model on all of `data` and save the checkpoint.
    Train(ConfigArgs),
    /// Score a saved model on `test_data`, or on `data` when unset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Leave-one-patient-out cross-validation.
    Loo {
        /// Re-run only this patient's fold.
        #[arg(long)]
        fold: Option<String>,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Train on `data`, evaluate on `test_data`.
    Cross(ConfigArgs),
    /// Compare predicted and true colocalization.
    Coloc {
        #[arg(long)]
        spots: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Write a synthetic dataset.
    Synth(ConfigArgs),
    /// Background fractions of a directory of `<spot_id>.png` patches.
    Fractions {
        #[arg(long)]
        patches: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WHITE_THRESHOLD)]
        white_threshold: u8,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_IO
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Config(_) => EXIT_IO,
        _ => EXIT_FAILURE,
    }
}

pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Validate { spots, abundances } => cmd_validate(&spots, &abundances),
        Command::Train(c) => cmd_train(&c),
        Command::Eval { model, common } => cmd_eval(&model, &common),
        Command::Loo { fold, common } => cmd_loo(fold.as_deref(), &common),
        Command::Cross(c) => cmd_cross(&c),
        Command::Coloc { spots, truth, pred, common } => cmd_coloc(&spots, &truth, &pred, &common),
        Command::Synth(c) => cmd_synth(&c),
        Command::Fractions {
            patches,
            output,
            white_threshold,
        } => cmd_fractions(&patches, &output, white_threshold),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Builds the effective config: file (or defaults), then `--set`
/// overrides, then the dedicated flags.
pub fn resolve_config(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let base = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let mut cfg = base.with_overrides(&args.overrides)?;
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(seed) = args.seed {
        cfg.train.seed = seed;
        cfg.synth.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn record(command: &str, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let path = RunRecord::new(command, cfg, dir)?.save(dir)?;
    log::info!("run record written to {}", path.display());
    Ok(())
}

fn fmt3(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |v| format!("{v:.3}"))
}

pub fn cmd_validate(spots: &Path, abundances: &Path) -> Result<i32> {
    let findings = scan_dataset(spots, abundances)?;
    for f in &findings {
        println!("{f}");
    }
    if findings.is_empty() {
        println!("ok");
        Ok(EXIT_OK)
    } else {
        println!("{} problem(s) found", findings.len());
        Ok(EXIT_FAILURE)
    }
}

fn cmd_train(args: &ConfigArgs) -> Result<i32> {
    let cfg = resolve_config(args)?;
    cfg.validate_for(Mode::Loo)?;
    let data = Dataset::load(&cfg.data, &cfg.patch)?;
    let outcome = fit(
        data.spots.embeddings(),
        data.abundances.values(),
        data.abundances.cell_types().to_vec(),
        &cfg.train,
    )?;
    let dir = cfg.experiment_dir();
    save_checkpoint(&outcome.model, dir.join("model.ckpt"))?;
    let mut history = String::from("epoch,loss\n");
    for (i, l) in outcome.history.iter().enumerate() {
        history.push_str(&format!("{},{l:?}\n", i + 1));
    }
    crate::dataset::io::write_all(&dir.join("history.csv"), &history)?;
    record("train", &cfg, &dir)?;
    println!(
        "trained on {} spots, final loss {}",
        data.len(),
        fmt3(outcome.history.last().copied())
    );
    Ok(EXIT_OK)
}

fn summary_line(outcome: &FoldOutcome) -> String {
    match &outcome.result {
        Ok(r) => format!(
            "{}: mean CC {:.3} L1 {:.3} cosine {} correlation {}",
            outcome.fold,
            r.pooled.mean_cc,
            r.pooled.l1,
            fmt3(r.comparison.map(|c| c.cosine)),
            fmt3(r.comparison.map(|c| c.correlation))
        ),
        Err(e) => format!("{}: failed: {e}", outcome.fold),
    }
}

fn cmd_eval(model: &Path, args: &ConfigArgs) -> Result<i32> {
    let cfg = resolve_config(args)?;
    let paths = if cfg.test_data.is_set() { &cfg.test_data } else { &cfg.data };
    if !paths.is_set() {
        return Err(Error::Config("eval needs data or test_data paths".into()));
    }
    let data = Dataset::load(paths, &cfg.patch)?;
    let model = load_checkpoint(model)?;
    let n = data.len();
    let outcome = FoldOutcome {
        fold: "eval".into(),
        n_test_spots: n,
        result: assess("eval", model, Vec::new(), &data, None, &cfg.run_options()),
    };
    let dir = cfg.experiment_dir();
    write_fold(&outcome, &dir.join("eval"))?;
    record("eval", &cfg, &dir)?;
    println!("{}", summary_line(&outcome));
    Ok(if outcome.is_ok() { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_loo(fold: Option<&str>, args: &ConfigArgs) -> Result<i32> {
    let cfg = resolve_config(args)?;
    let outcomes = match fold {
        Some(f) => vec![run_fold(&cfg, f)?],
        None => run_loo(&cfg)?,
    };
    record(if fold.is_some() { "loo --fold" } else { "loo" }, &cfg, &cfg.experiment_dir())?;
    for o in &outcomes {
        println!("{}", summary_line(o));
    }
    let ok: Vec<_> = outcomes.iter().filter_map(|o| o.result.as_ref().ok()).collect();
    if !ok.is_empty() && fold.is_none() {
        let mean = |f: &dyn Fn(&crate::experiments::FoldReport) -> Option<f64>| {
            let v: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        println!(
            "all folds: mean CC {} L1 {} cosine {} correlation {}",
            fmt3(mean(&|r| Some(r.pooled.mean_cc))),
            fmt3(mean(&|r| Some(r.pooled.l1))),
            fmt3(mean(&|r| r.comparison.map(|c| c.cosine))),
            fmt3(mean(&|r| r.comparison.map(|c| c.correlation)))
        );
    }
    Ok(if ok.len() == outcomes.len() { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_cross(args: &ConfigArgs) -> Result<i32> {
    let cfg = resolve_config(args)?;
    let outcome = run_cross_dataset(&cfg)?;
    record("cross", &cfg, &cfg.experiment_dir())?;
    println!("{}", summary_line(&outcome));
    Ok(if outcome.is_ok() { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_coloc(spots: &Path, truth: &Path, pred: &Path, args: &ConfigArgs) -> Result<i32> {
    let cfg = resolve_config(args)?;
    let spots = load_spot_table_with_blocks(spots, &cfg.data.embeddings)?;
    let truth = load_abundance_table(truth, &spots)?;
    let pred = load_predictions(pred, &spots)?;
    if pred.cell_types() != truth.cell_types() {
        return Err(Error::Shape(format!(
            "cell types differ: {}",
            crate::dataset::describe_diff(pred.cell_types(), truth.cell_types())
        )));
    }
    let dir = cfg.experiment_dir().join("coloc");
    let mut mats: BTreeMap<&str, _> = BTreeMap::new();
    for (sample, rows) in spots.samples() {
        let coords = spots.coords().select(Axis(0), &rows);
        let l = cfg.spatial.length_scale_for(coords.view())?;
        let t = colocalization_from_coords(&truth.subset(&rows), coords.view(), l, format!("{sample} truth"))?;
        let p = colocalization_from_coords(&pred.subset(&rows), coords.view(), l, format!("{sample} predicted"))?;
        let stem = crate::experiments::file_stem(sample);
        t.save_csv(dir.join(format!("coloc_{stem}_truth.csv")))?;
        p.save_csv(dir.join(format!("coloc_{stem}_pred.csv")))?;
        let order = upgma_order(&t);
        crate::dataset::io::write_all(&dir.join(format!("coloc_{stem}.svg")), &render_heatmap(&p, &order)?)?;
        crate::dataset::io::write_all(&dir.join(format!("coloc_{stem}_truth.svg")), &render_heatmap(&t, &order)?)?;
        mats.insert(sample, (t, p, rows.len() as f64));
    }
    let truths: Vec<_> = mats.values().map(|m| m.0.clone()).collect();
    let preds: Vec<_> = mats.values().map(|m| m.1.clone()).collect();
    let weights: Vec<f64> = mats.values().map(|m| m.2).collect();
    let cmp = compare_colocalization(&average_coloc(&preds, &weights)?, &average_coloc(&truths, &weights)?)?;
    record("coloc", &cfg, &cfg.experiment_dir())?;
    println!("cosine {:.3} correlation {:.3}", cmp.cosine, cmp.correlation);
    Ok(EXIT_OK)
}

fn cmd_synth(args: &ConfigArgs) -> Result<i32> {
    let cfg = resolve_config(args)?;
    let dir = cfg.experiment_dir();
    let (spots, abund) = write_synthetic(&cfg.synth, &dir)?;
    record("synth", &cfg, &dir)?;
    println!("wrote {} and {}", spots.display(), abund.display());
    Ok(EXIT_OK)
}

fn cmd_fractions(patches: &Path, output: &Path, white_threshold: u8) -> Result<i32> {
    let fractions = fractions_from_dir(patches, white_threshold)?;
    write_fractions(&fractions, output)?;
    println!("{} patches measured", fractions.len());
    Ok(EXIT_OK)
}
