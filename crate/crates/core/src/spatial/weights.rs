use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Row-and-column normalized RBF proximity weights for one sample.
///
/// `w[i][j] = n · k(d_ij) / Σ k` with `k(d) = exp(-d² / 2l²)` and a zero
/// diagonal, so the entries sum to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub length_scale: f64,
    w: Array2<f64>,
}

impl WeightMatrix {
    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.w.view()
    }

    pub fn total(&self) -> f64 {
        self.w.sum()
    }
}

pub fn rbf_weights(coords: ArrayView2<f64>, length_scale: f64) -> Result<WeightMatrix> {
    let n = coords.nrows();
    if coords.ncols() != 2 {
        return Err(Error::Shape(format!("coordinates need 2 columns, got {}", coords.ncols())));
    }
    if n < 2 {
        return Err(Error::invalid("spatial weights need at least 2 spots"));
    }
    if !(length_scale > 0.0 && length_scale.is_finite()) {
        return Err(Error::invalid(format!("length scale must be positive, got {length_scale}")));
    }
    let denom = 2.0 * length_scale * length_scale;
    let mut w = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = coords[[i, 0]] - coords[[j, 0]];
            let dy = coords[[i, 1]] - coords[[j, 1]];
            let k = (-(dx * dx + dy * dy) / denom).exp();
            w[[i, j]] = k;
            w[[j, i]] = k;
        }
    }
    let total = w.sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::Numerical(format!(
            "all kernel weights vanish at length scale {length_scale}; spots are too far apart"
        )));
    }
    let nf = n as f64;
    w.mapv_inplace(|k| nf * k / total);
    Ok(WeightMatrix { length_scale, w })
}

/// Median over spots of the distance to the nearest other spot.
pub fn median_nearest_neighbor(coords: ArrayView2<f64>) -> Result<f64> {
    let n = coords.nrows();
    if n < 2 {
        return Err(Error::invalid("nearest-neighbor distance needs at least 2 spots"));
    }
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let dx = coords[[i, 0]] - coords[[j, 0]];
                    let dy = coords[[i, 1]] - coords[[j, 1]];
                    (dx * dx + dy * dy).sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nearest.sort_by(f64::total_cmp);
    Ok(if n % 2 == 1 {
        nearest[n / 2]
    } else {
        0.5 * (nearest[n / 2 - 1] + nearest[n / 2])
    })
}
