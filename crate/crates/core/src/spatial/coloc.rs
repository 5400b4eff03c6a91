use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::{rbf_weights, WeightMatrix};
use crate::dataset::io::{fmt_num, write_all};
use crate::dataset::AbundanceMatrix;
use crate::error::{Error, Result};
use crate::metrics::pearson;

/// Pairwise bivariate Moran's R between cell types.
///
/// Entries involving a cell type with a constant abundance pattern are
/// undefined and stored as NaN; use [`ColocMatrix::get`] to read them as
/// `Option`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColocMatrix {
    pub cell_types: Vec<String>,
    /// Sample id, or `"averaged"` for pooled matrices.
    pub label: String,
    r: Array2<f64>,
}

impl ColocMatrix {
    pub fn new(cell_types: Vec<String>, label: impl Into<String>, r: Array2<f64>) -> Result<Self> {
        let c = cell_types.len();
        if r.dim() != (c, c) {
            return Err(Error::Shape(format!("colocalization matrix {:?} for {c} cell types", r.dim())));
        }
        if r.iter().any(|v| v.is_infinite()) {
            return Err(Error::invalid("infinite colocalization entry"));
        }
        Ok(Self {
            cell_types,
            label: label.into(),
            r,
        })
    }

    pub fn len(&self) -> usize {
        self.cell_types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_types.is_empty()
    }

    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        let v = self.r[[a, b]];
        (!v.is_nan()).then_some(v)
    }

    /// Raw values with NaN marking undefined entries.
    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.r.view()
    }

    pub fn is_fully_defined(&self) -> bool {
        self.r.iter().all(|v| !v.is_nan())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell_type");
        for c in &self.cell_types {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (name, row) in self.cell_types.iter().zip(self.r.rows()) {
            out.push_str(name);
            for &v in row {
                out.push(',');
                if v.is_nan() {
                    out.push_str("NA");
                } else {
                    out.push_str(&fmt_num(v));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_all(path.as_ref(), &self.to_csv())
    }

    pub fn load_csv(path: impl AsRef<Path>, label: impl Into<String>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let schema = |line: usize, message: String| Error::Schema {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
        let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
        if header.first() != Some(&"cell_type") {
            return Err(schema(1, "first header column must be \"cell_type\"".into()));
        }
        let types: Vec<String> = header[1..].iter().map(|s| s.to_string()).collect();
        let c = types.len();
        let mut r = Array2::<f64>::zeros((c, c));
        for a in 0..c {
            let line = lines.next().ok_or_else(|| schema(a + 2, "missing row".into()))?;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != c + 1 || fields[0] != types[a] {
                return Err(schema(a + 2, format!("expected row for {:?} with {} values", types[a], c)));
            }
            for (b, f) in fields[1..].iter().enumerate() {
                r[[a, b]] = if *f == "NA" {
                    f64::NAN
                } else {
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| schema(a + 2, format!("bad value {f:?}")))?
                };
            }
        }
        ColocMatrix::new(types, label, r)
    }
}

fn centered_columns(values: ArrayView2<f64>) -> (Array2<f64>, Vec<bool>) {
    let n = values.nrows() as f64;
    let means = values.sum_axis(Axis(0)) / n;
    let defined = values
        .axis_iter(Axis(1))
        .map(|col| col.iter().any(|&v| v != col[0]))
        .collect();
    (&values - &means, defined)
}

/// Moran's R for every pair of cell types of one sample.
///
/// The diagonal holds each type's univariate Moran's I. The upper triangle is
/// computed and mirrored, so the result is exactly symmetric.
pub fn colocalization_matrix(abund: &AbundanceMatrix, weights: &WeightMatrix, label: impl Into<String>) -> Result<ColocMatrix> {
    let n = abund.n_spots();
    if n < 2 {
        return Err(Error::invalid("colocalization needs at least 2 spots"));
    }
    if weights.n() != n {
        return Err(Error::Shape(format!("{} weights for {n} spots", weights.n())));
    }
    let (yc, defined) = centered_columns(abund.values());
    let lagged = weights.values().dot(&yc);
    let norms: Array1<f64> = yc.axis_iter(Axis(1)).map(|c| c.dot(&c)).collect();
    let c = abund.n_types();
    let mut r = Array2::from_elem((c, c), f64::NAN);
    for a in 0..c {
        for b in a..c {
            if defined[a] && defined[b] {
                let num = yc.column(a).dot(&lagged.column(b));
                let v = num / (norms[a] * norms[b]).sqrt();
                r[[a, b]] = v;
                r[[b, a]] = v;
            }
        }
    }
    ColocMatrix::new(abund.cell_types().to_vec(), label, r)
}

/// Convenience wrapper building RBF weights from `coords` first.
pub fn colocalization_from_coords(
    abund: &AbundanceMatrix,
    coords: ArrayView2<f64>,
    length_scale: f64,
    label: impl Into<String>,
) -> Result<ColocMatrix> {
    let w = rbf_weights(coords, length_scale)?;
    colocalization_matrix(abund, &w, label)
}

/// Entrywise weighted mean over the matrices where each entry is defined.
pub fn average_coloc(mats: &[ColocMatrix], weights: &[f64]) -> Result<ColocMatrix> {
    let first = mats.first().ok_or_else(|| Error::invalid("no colocalization matrices to average"))?;
    if weights.len() != mats.len() {
        return Err(Error::Shape(format!("{} weights for {} matrices", weights.len(), mats.len())));
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::invalid("averaging weights must be finite and non-negative"));
    }
    for m in &mats[1..] {
        if m.cell_types != first.cell_types {
            return Err(Error::Shape(format!(
                "cell types differ between {:?} and {:?}",
                first.label, m.label
            )));
        }
    }
    let c = first.len();
    let mut r = Array2::from_elem((c, c), f64::NAN);
    for a in 0..c {
        for b in 0..c {
            let (mut num, mut den) = (0.0, 0.0);
            for (m, &w) in mats.iter().zip(weights) {
                if let Some(v) = m.get(a, b) {
                    num += w * v;
                    den += w;
                }
            }
            if den > 0.0 {
                r[[a, b]] = num / den;
            }
        }
    }
    ColocMatrix::new(first.cell_types.clone(), "averaged", r)
}

/// Row-wise agreement between a predicted and a reference colocalization
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColocComparison {
    /// Mean over rows of the cosine similarity.
    pub cosine: f64,
    /// Mean over rows of the Pearson correlation.
    pub correlation: f64,
    pub rows_used: usize,
}

fn cosine(x: ArrayView1<f64>, y: ArrayView1<f64>) -> Option<f64> {
    let nx = x.dot(&x).sqrt();
    let ny = y.dot(&y).sqrt();
    if nx == 0.0 || ny == 0.0 {
        return None;
    }
    Some((x.dot(&y) / (nx * ny)).clamp(-1.0, 1.0))
}

/// Compares full rows, diagonal included. Entries undefined in either matrix
/// are dropped pairwise; rows left with fewer than two entries, or with no
/// spread, are skipped.
pub fn compare_colocalization(pred: &ColocMatrix, truth: &ColocMatrix) -> Result<ColocComparison> {
    if pred.cell_types != truth.cell_types {
        return Err(Error::Shape(format!(
            "cell types differ: {}",
            crate::dataset::describe_diff(&pred.cell_types, &truth.cell_types)
        )));
    }
    let c = pred.len();
    let (mut cos_sum, mut corr_sum, mut used) = (0.0, 0.0, 0usize);
    for a in 0..c {
        let (p, t): (Vec<f64>, Vec<f64>) = (0..c)
            .filter_map(|b| Some((pred.get(a, b)?, truth.get(a, b)?)))
            .unzip();
        if p.len() < 2 {
            continue;
        }
        let (p, t) = (Array1::from(p), Array1::from(t));
        if let (Some(cs), Some(cr)) = (cosine(p.view(), t.view()), pearson(p.view(), t.view())) {
            cos_sum += cs;
            corr_sum += cr;
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::Numerical("no comparable colocalization rows".into()));
    }
    Ok(ColocComparison {
        cosine: cos_sum / used as f64,
        correlation: corr_sum / used as f64,
        rows_used: used,
    })
}
