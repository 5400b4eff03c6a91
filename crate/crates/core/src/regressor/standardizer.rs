use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Per-column affine map to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Array1<f64>,
    /// Population standard deviations; columns without spread store 1.0.
    pub stds: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::invalid("cannot fit a standardizer on an empty matrix"));
        }
        let n = x.nrows() as f64;
        let means = x.sum_axis(Axis(0)) / n;
        let stds = x
            .axis_iter(Axis(1))
            .zip(means.iter())
            .map(|(col, &m)| {
                let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
                let sd = var.sqrt();
                // Rounding in the mean leaves ~1 ulp of spread on constant columns.
                if sd <= 1e-12 * m.abs().max(1.0) {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(Self { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "standardizer expects {} columns, got {}",
                self.dim(),
                x.ncols()
            )));
        }
        Ok((&x - &self.means) / &self.stds)
    }
}
