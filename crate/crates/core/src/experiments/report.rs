//! `report.csv` and `summary.csv` writers, and summary recomputation from
//! fold directories.
//!
//! `report.csv` columns:
//! `split,sample_id,cell_type,n_spots,cc,l1,baseline_l1,coloc_cosine,coloc_correlation`.
//! Each scored sample contributes one row per cell type followed by a row
//! with `cell_type = *` holding the sample's mean CC, L1, baseline and
//! colocalization agreement. The last row has `sample_id = *` and
//! `cell_type = *` and pools all test spots of the split; its
//! colocalization columns compare the spot-weighted average matrices.
//! Undefined values are written as `NA`.

use std::fs;
use std::path::Path;

use super::runner::{FoldOutcome, FoldReport};
use super::file_stem;
use crate::dataset::io::fmt_num;
use crate::error::{Error, Result};
use crate::spatial::ColocComparison;

pub const REPORT_HEADER: &str = "split,sample_id,cell_type,n_spots,cc,l1,baseline_l1,coloc_cosine,coloc_correlation";
pub const SUMMARY_HEADER: &str = "fold,status,n_test_spots,mean_cc,l1,baseline_l1,coloc_cosine,coloc_correlation";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_num)
}

fn coloc_fields(c: Option<&ColocComparison>) -> String {
    format!("{},{}", opt(c.map(|c| c.cosine)), opt(c.map(|c| c.correlation)))
}

pub fn report_csv(report: &FoldReport) -> String {
    let split = &report.fold;
    let mut out = format!("{REPORT_HEADER}\n");
    for s in &report.samples {
        let sample = &s.sample_id;
        if let Some(e) = &s.eval {
            for (k, ct) in e.cell_types.iter().enumerate() {
                out.push_str(&format!(
                    "{split},{sample},{ct},{},{},{},NA,NA,NA\n",
                    s.n_spots,
                    opt(e.per_cell_type_cc[k]),
                    fmt_num(e.per_cell_type_l1[k])
                ));
            }
        }
        out.push_str(&format!(
            "{split},{sample},*,{},{},{},{},{}\n",
            s.n_spots,
            opt(s.eval.as_ref().map(|e| e.mean_cc)),
            opt(s.eval.as_ref().map(|e| e.l1)),
            opt(s.baseline_l1),
            coloc_fields(s.comparison.as_ref())
        ));
    }
    let p = &report.pooled;
    out.push_str(&format!(
        "{split},*,*,{},{},{},{},{}\n",
        p.n_spots,
        fmt_num(p.mean_cc),
        fmt_num(p.l1),
        opt(report.baseline_l1),
        coloc_fields(report.comparison.as_ref())
    ));
    out
}

pub fn summary_csv(outcomes: &[FoldOutcome]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for o in outcomes {
        match &o.result {
            Ok(r) => out.push_str(&format!(
                "{},ok,{},{},{},{},{}\n",
                o.fold,
                o.n_test_spots,
                fmt_num(r.pooled.mean_cc),
                fmt_num(r.pooled.l1),
                opt(r.baseline_l1),
                coloc_fields(r.comparison.as_ref())
            )),
            Err(_) => out.push_str(&format!("{},failed,{},NA,NA,NA,NA,NA\n", o.fold, o.n_test_spots)),
        }
    }
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Rebuilds `summary.csv` from the fold directories of an experiment,
/// reading only `report.csv` and `error.txt` files.
pub fn recompute_summary(experiment_dir: impl AsRef<Path>) -> Result<String> {
    let dir = experiment_dir.as_ref();
    let mut rows: Vec<(String, String)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_dir() {
            continue;
        }
        let report = path.join("report.csv");
        let error = path.join("error.txt");
        if report.exists() {
            let text = read(&report)?;
            let pooled = text
                .lines()
                .find(|l| l.split(',').nth(1) == Some("*"))
                .ok_or_else(|| Error::Schema {
                    path: report.clone(),
                    line: 0,
                    message: "no pooled row".into(),
                })?;
            let f: Vec<&str> = pooled.split(',').collect();
            if f.len() != 9 {
                return Err(Error::Schema {
                    path: report,
                    line: 0,
                    message: format!("pooled row has {} fields", f.len()),
                });
            }
            rows.push((f[0].to_string(), format!("{},ok,{},{},{},{},{},{}", f[0], f[3], f[4], f[5], f[6], f[7], f[8])));
        } else if error.exists() {
            let text = read(&error)?;
            let mut lines = text.lines();
            let field = |line: Option<&str>, key: &str| -> Result<String> {
                line.and_then(|l| l.strip_prefix(key))
                    .and_then(|l| l.strip_prefix(','))
                    .map(str::to_string)
                    .ok_or_else(|| Error::Schema {
                        path: error.clone(),
                        line: 0,
                        message: format!("missing {key} line"),
                    })
            };
            let fold = field(lines.next(), "fold")?;
            let n = field(lines.next(), "n_test_spots")?;
            rows.push((fold.clone(), format!("{fold},failed,{n},NA,NA,NA,NA,NA")));
        }
    }
    rows.sort();
    for (fold, _) in &rows {
        let expected = dir.join(file_stem(fold));
        if !expected.is_dir() {
            return Err(Error::invalid(format!("fold {fold:?} is not stored in {}", expected.display())));
        }
    }
    let mut out = format!("{SUMMARY_HEADER}\n");
    for (_, row) in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}
