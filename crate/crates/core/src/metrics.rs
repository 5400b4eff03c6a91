//! Accuracy of predicted abundances: per-cell-type Pearson correlation across
//! spots (CC score) and mean absolute error (L1 score).

use ndarray::{Array2, ArrayView1, ArrayView2, Axis, Zip};

use crate::dataset::AbundanceMatrix;
use crate::error::{Error, Result};

/// Pearson correlation of two equal-length vectors; `None` when either has
/// no spread.
pub fn pearson(x: ArrayView1<f64>, y: ArrayView1<f64>) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n || is_constant(x) || is_constant(y) {
        return None;
    }
    let xm = x.sum() / n as f64;
    let ym = y.sum() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y.iter()) {
        let (da, db) = (a - xm, b - ym);
        sxx += da * da;
        syy += db * db;
        sxy += da * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn is_constant(v: ArrayView1<f64>) -> bool {
    v.iter().all(|&a| a == v[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcScores {
    /// One entry per cell type; `None` where the correlation is undefined.
    pub per_type: Vec<Option<f64>>,
    /// Mean over defined entries only.
    pub mean: f64,
}

pub fn cc_score(pred: &AbundanceMatrix, truth: &AbundanceMatrix) -> Result<CcScores> {
    pred.check_aligned(truth)?;
    cc_score_values(pred.values(), truth.values())
}

pub fn cc_score_values(pred: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<CcScores> {
    if pred.dim() != truth.dim() {
        return Err(Error::Shape(format!("{:?} vs {:?}", pred.dim(), truth.dim())));
    }
    if pred.nrows() < 2 {
        return Err(Error::invalid("CC score needs at least 2 spots"));
    }
    let per_type: Vec<Option<f64>> = pred
        .axis_iter(Axis(1))
        .zip(truth.axis_iter(Axis(1)))
        .map(|(p, t)| pearson(p, t))
        .collect();
    let defined: Vec<f64> = per_type.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::Numerical("no defined correlations".into()));
    }
    let mean = defined.iter().sum::<f64>() / defined.len() as f64;
    Ok(CcScores { per_type, mean })
}

/// Rows scaled to sum to one; all-zero rows stay zero.
pub fn row_normalize(values: ArrayView2<f64>) -> Array2<f64> {
    let mut out = values.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let s = row.sum();
        if s != 0.0 {
            row /= s;
        }
    }
    out
}

pub fn l1_score(pred: &AbundanceMatrix, truth: &AbundanceMatrix, normalize: bool) -> Result<f64> {
    pred.check_aligned(truth)?;
    l1_score_values(pred.values(), truth.values(), normalize)
}

pub fn l1_score_values(pred: ArrayView2<f64>, truth: ArrayView2<f64>, normalize: bool) -> Result<f64> {
    let per_type = l1_per_type(pred, truth, normalize)?;
    Ok(per_type.iter().sum::<f64>() / per_type.len() as f64)
}

/// Mean absolute error of each cell-type column.
pub fn l1_per_type(pred: ArrayView2<f64>, truth: ArrayView2<f64>, normalize: bool) -> Result<Vec<f64>> {
    if pred.dim() != truth.dim() {
        return Err(Error::Shape(format!("{:?} vs {:?}", pred.dim(), truth.dim())));
    }
    if pred.is_empty() {
        return Err(Error::invalid("L1 score of an empty matrix"));
    }
    let (p, t) = if normalize {
        (row_normalize(pred), row_normalize(truth))
    } else {
        (pred.to_owned(), truth.to_owned())
    };
    let mut diff = Array2::<f64>::zeros(p.dim());
    Zip::from(&mut diff).and(&p).and(&t).for_each(|d, a, b| *d = (a - b).abs());
    Ok(diff
        .mean_axis(Axis(0))
        .expect("non-empty")
        .to_vec())
}

/// Accuracy of one group of held-out spots.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub sample_id: String,
    pub cell_types: Vec<String>,
    pub per_cell_type_cc: Vec<Option<f64>>,
    pub per_cell_type_l1: Vec<f64>,
    pub mean_cc: f64,
    pub l1: f64,
    pub n_spots: usize,
    pub undefined_cc_types: Vec<String>,
}

/// CC and L1 of `pred` against `truth`. With `normalize`, both are computed
/// on per-spot proportions.
pub fn evaluate(sample_id: &str, pred: &AbundanceMatrix, truth: &AbundanceMatrix, normalize: bool) -> Result<EvalReport> {
    pred.check_aligned(truth)?;
    let (p, t) = if normalize {
        (row_normalize(pred.values()), row_normalize(truth.values()))
    } else {
        (pred.values().to_owned(), truth.values().to_owned())
    };
    let cc = cc_score_values(p.view(), t.view())?;
    let per_type_l1 = l1_per_type(p.view(), t.view(), false)?;
    let l1 = per_type_l1.iter().sum::<f64>() / per_type_l1.len() as f64;
    let undefined = cc
        .per_type
        .iter()
        .zip(truth.cell_types())
        .filter(|(c, _)| c.is_none())
        .map(|(_, name)| name.clone())
        .collect();
    Ok(EvalReport {
        sample_id: sample_id.to_string(),
        cell_types: truth.cell_types().to_vec(),
        per_cell_type_cc: cc.per_type,
        per_cell_type_l1: per_type_l1,
        mean_cc: cc.mean,
        l1,
        n_spots: truth.n_spots(),
        undefined_cc_types: undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn matrix(values: Array2<f64>) -> AbundanceMatrix {
        let ids = (0..values.nrows()).map(|i| format!("s{i}")).collect();
        let types = (0..values.ncols()).map(|i| format!("T{i}")).collect();
        AbundanceMatrix::new(ids, types, values).unwrap()
    }

    #[test]
    fn cc_examples() {
        let t = matrix(array![[1.0, 0.0], [2.0, 5.0], [4.0, 1.0]]);
        let same = cc_score(&t, &t).unwrap();
        assert!(same.per_type.iter().all(|c| (c.unwrap() - 1.0).abs() < 1e-12));
        let neg = cc_score(&matrix(-&t.values()), &t).unwrap();
        assert!(neg.per_type.iter().all(|c| (c.unwrap() + 1.0).abs() < 1e-12));
        let flat = matrix(array![[1.0, 3.0], [2.0, 3.0], [4.0, 3.0]]);
        let r = cc_score(&flat, &t).unwrap();
        assert_eq!(r.per_type[1], None);
        assert!((r.mean - 1.0).abs() < 1e-12);
        let all_flat = matrix(array![[1.0, 3.0], [1.0, 3.0]]);
        assert!(cc_score(&all_flat, &all_flat).is_err());
    }

    #[test]
    fn l1_examples() {
        let t = matrix(array![[1.0, 0.0], [2.0, 5.0]]);
        assert_eq!(l1_score(&t, &t, false).unwrap(), 0.0);
        assert_eq!(l1_score(&matrix(t.values().mapv(|v| v + 0.5)), &t, false).unwrap(), 0.5);
    }

    #[test]
    fn normalized_l1_compares_proportions() {
        let t = matrix(array![[1.0, 3.0], [0.0, 0.0]]);
        let p = matrix(array![[2.0, 6.0], [0.0, 0.0]]);
        assert_eq!(l1_score(&p, &t, true).unwrap(), 0.0);
        assert!(l1_score(&p, &t, false).unwrap() > 0.0);
    }

    #[test]
    fn evaluate_lists_undefined_types() {
        let t = matrix(array![[1.0, 2.0, 0.0], [2.0, 2.0, 1.0], [3.0, 2.0, 5.0]]);
        let p = matrix(array![[1.5, 1.0, 0.0], [2.5, 2.0, 2.0], [2.0, 3.0, 4.0]]);
        let r = evaluate("A1", &p, &t, false).unwrap();
        assert_eq!(r.undefined_cc_types, vec!["T1".to_string()]);
        assert_eq!(r.n_spots, 3);
        let mean_l1 = r.per_cell_type_l1.iter().sum::<f64>() / 3.0;
        assert!((r.l1 - mean_l1).abs() < 1e-15);
    }
}
