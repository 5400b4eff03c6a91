//! Spatial colocalization of cell types: RBF proximity weights, bivariate
//! Moran's R, per-sample colocalization matrices, their comparison, and
//! clustermap ordering and rendering.

mod cluster;
mod coloc;
mod heatmap;
mod moran;
mod weights;

pub use cluster::upgma_order;
pub use coloc::{
    average_coloc, colocalization_from_coords, colocalization_matrix, compare_colocalization, ColocComparison,
    ColocMatrix,
};
pub use heatmap::{
    diverging_color, hex, render_heatmap, Rgb, MIDPOINT_COLOR, NEGATIVE_COLOR, POSITIVE_COLOR, UNDEFINED_COLOR,
};
pub use moran::morans_r;
pub use weights::{median_nearest_neighbor, rbf_weights, WeightMatrix};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// How the RBF length scale is chosen for each sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialConfig {
    /// Fixed length scale in pixels; when unset it is derived per sample.
    pub length_scale: Option<f64>,
    /// Multiplier on the median nearest-neighbor distance.
    pub nn_multiplier: f64,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        Self {
            length_scale: None,
            nn_multiplier: 1.5,
        }
    }
}

impl SpatialConfig {
    pub fn length_scale_for(&self, coords: ndarray::ArrayView2<f64>) -> Result<f64> {
        match self.length_scale {
            Some(l) => Ok(l),
            None => Ok(self.nn_multiplier * median_nearest_neighbor(coords)?),
        }
    }
}
