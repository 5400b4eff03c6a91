//! Composite regression loss: `MSE + λ1·MAE + λ2·L_pearson`, with its
//! analytic gradient with respect to the predictions.
//!
//! The correlation term is evaluated per cell-type column across the rows of
//! the batch and averaged over columns, which is the same axis the CC score
//! is reported on.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights of the three loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Added to the correlation denominator.
    pub epsilon: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda1: 0.5,
            lambda2: 0.5,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LossBreakdown {
    pub mse: f64,
    pub mae: f64,
    pub pearson: f64,
    pub total: f64,
    /// ∂total/∂pred, same shape as the predictions.
    pub grad: Array2<f64>,
}

fn check_shapes(pred: &ArrayView2<f64>, truth: &ArrayView2<f64>) -> Result<()> {
    if pred.dim() != truth.dim() {
        return Err(Error::Shape(format!(
            "predictions {:?} vs truth {:?}",
            pred.dim(),
            truth.dim()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("empty prediction matrix"));
    }
    Ok(())
}

pub fn mse(pred: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
    check_shapes(&pred, &truth)?;
    let sum: f64 = Zip::from(&pred).and(&truth).fold(0.0, |acc, p, t| acc + (p - t) * (p - t));
    Ok(sum / pred.len() as f64)
}

pub fn mae(pred: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
    check_shapes(&pred, &truth)?;
    let sum: f64 = Zip::from(&pred).and(&truth).fold(0.0, |acc, p, t| acc + (p - t).abs());
    Ok(sum / pred.len() as f64)
}

/// Per-column statistics for the ε-guarded negative correlation.
struct ColumnCorr {
    value: f64,
    pred_norm: f64,
    truth_norm: f64,
    cross: f64,
    denom: f64,
}

fn column_corr(p: ArrayView1<f64>, t: ArrayView1<f64>, epsilon: f64) -> ColumnCorr {
    let n = p.len() as f64;
    // a constant column is centered exactly, whatever rounding the mean has
    let constant = |v: ArrayView1<f64>| v.iter().all(|&a| a == v[0]);
    let pm = if constant(p) { p[0] } else { p.sum() / n };
    let tm = if constant(t) { t[0] } else { t.sum() / n };
    let (mut spp, mut stt, mut spt) = (0.0, 0.0, 0.0);
    for (a, b) in p.iter().zip(t.iter()) {
        let (da, db) = (a - pm, b - tm);
        spp += da * da;
        stt += db * db;
        spt += da * db;
    }
    let pred_norm = spp.sqrt();
    let truth_norm = stt.sqrt();
    let denom = pred_norm * truth_norm + epsilon;
    ColumnCorr {
        value: -spt / denom,
        pred_norm,
        truth_norm,
        cross: spt,
        denom,
    }
}

/// Negative Pearson correlation, averaged over columns. Requires at least two
/// rows.
pub fn pearson_loss(pred: ArrayView2<f64>, truth: ArrayView2<f64>, epsilon: f64) -> Result<f64> {
    check_shapes(&pred, &truth)?;
    if pred.nrows() < 2 {
        return Err(Error::invalid("correlation loss needs at least 2 rows"));
    }
    let c = pred.ncols() as f64;
    let total: f64 = pred
        .axis_iter(Axis(1))
        .zip(truth.axis_iter(Axis(1)))
        .map(|(p, t)| column_corr(p, t, epsilon).value)
        .sum();
    Ok(total / c)
}

/// All three terms, the weighted total, and the gradient of the total.
///
/// Subgradient conventions: the absolute error contributes 0 where
/// `pred == truth`, and a column whose predictions have zero spread
/// contributes 0 to both the loss and the gradient.
pub fn composite_loss(pred: ArrayView2<f64>, truth: ArrayView2<f64>, w: &LossWeights) -> Result<LossBreakdown> {
    check_shapes(&pred, &truth)?;
    let (n, c) = pred.dim();
    if n < 2 {
        return Err(Error::invalid("composite loss needs at least 2 rows"));
    }
    let count = (n * c) as f64;
    let mut grad = Array2::<f64>::zeros((n, c));
    let (mut sq, mut abs) = (0.0, 0.0);
    Zip::from(&mut grad).and(&pred).and(&truth).for_each(|g, &p, &t| {
        let d = p - t;
        sq += d * d;
        abs += d.abs();
        let sign = if d > 0.0 {
            1.0
        } else if d < 0.0 {
            -1.0
        } else {
            0.0
        };
        *g = (2.0 * d + w.lambda1 * sign) / count;
    });

    let mut pearson = 0.0;
    let scale = w.lambda2 / c as f64;
    for j in 0..c {
        let p = pred.column(j);
        let t = truth.column(j);
        let stats = column_corr(p, t, w.epsilon);
        pearson += stats.value;
        if scale == 0.0 || stats.pred_norm == 0.0 {
            continue;
        }
        let pm = p.sum() / n as f64;
        let tm = t.sum() / n as f64;
        // d(-S_pt / (|p||t| + ε)) / dp_i
        let coef = stats.cross * stats.truth_norm / stats.pred_norm;
        let d2 = stats.denom * stats.denom;
        for i in 0..n {
            let dp = p[i] - pm;
            let dt = t[i] - tm;
            grad[[i, j]] += scale * -(dt * stats.denom - coef * dp) / d2;
        }
    }
    let mse = sq / count;
    let mae = abs / count;
    let pearson = pearson / c as f64;
    Ok(LossBreakdown {
        mse,
        mae,
        pearson,
        total: mse + w.lambda1 * mae + w.lambda2 * pearson,
        grad,
    })
}
