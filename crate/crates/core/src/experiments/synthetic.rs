//! Synthetic datasets with a known embedding → abundance map.
//!
//! Embeddings are standard normal; abundances are `softplus(G·z + h)` for a
//! seeded random `(G, h)` shared by all patients, plus Gaussian noise of
//! standard deviation `noise_sigma` (clipped at zero). Spots of each patient
//! sit on a jittered square grid.

use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{write_abundance_table, write_spot_table, AbundanceMatrix, SpotTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_patients: usize,
    pub spots_per_patient: usize,
    /// Embedding dimension.
    pub dim: usize,
    pub n_cell_types: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Spot spacing in pixels.
    pub grid_pitch: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_patients: 3,
            spots_per_patient: 200,
            dim: 16,
            n_cell_types: 5,
            noise_sigma: 0.0,
            seed: 7,
            grid_pitch: 100.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_patients == 0 || self.spots_per_patient == 0 || self.dim == 0 {
            return Err(Error::Config("synthetic patients, spots and dim must be positive".into()));
        }
        if self.n_cell_types < 2 {
            return Err(Error::Config("synthetic data needs at least 2 cell types".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config("noise_sigma must be finite and >= 0".into()));
        }
        if !(self.grid_pitch > 0.0 && self.grid_pitch.is_finite()) {
            return Err(Error::Config("grid_pitch must be positive".into()));
        }
        Ok(())
    }
}

fn softplus(v: f64) -> f64 {
    if v > 30.0 {
        v
    } else {
        v.exp().ln_1p()
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(SpotTable, AbundanceMatrix)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (d, c) = (spec.dim, spec.n_cell_types);
    let scale = 1.0 / (d as f64).sqrt();
    let g = Array2::from_shape_simple_fn((c, d), || scale * rng.sample::<f64, _>(StandardNormal));
    let h = Array1::from_shape_simple_fn(c, || rng.sample::<f64, _>(StandardNormal));
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Config(e.to_string()))?;

    let n = spec.n_patients * spec.spots_per_patient;
    let side = (spec.spots_per_patient as f64).sqrt().ceil() as usize;
    let mut spot_ids = Vec::with_capacity(n);
    let mut sample_ids = Vec::with_capacity(n);
    let mut patient_ids = Vec::with_capacity(n);
    let mut coords = Array2::<f64>::zeros((n, 2));
    let mut z = Array2::<f64>::zeros((n, d));
    let mut y = Array2::<f64>::zeros((n, c));
    let width = (spec.n_patients * 4).to_string().len().max(2);
    let mut row = 0;
    for p in 0..spec.n_patients {
        let patient = format!("P{:0width$}", p + 1);
        let sample = format!("{patient}_S1");
        for s in 0..spec.spots_per_patient {
            spot_ids.push(format!("{sample}_{s:05}"));
            sample_ids.push(sample.clone());
            patient_ids.push(patient.clone());
            let jitter = 0.1 * spec.grid_pitch;
            coords[[row, 0]] = spec.grid_pitch * (1 + s % side) as f64 + rng.gen_range(-jitter..=jitter);
            coords[[row, 1]] = spec.grid_pitch * (1 + s / side) as f64 + rng.gen_range(-jitter..=jitter);
            for k in 0..d {
                z[[row, k]] = rng.sample(StandardNormal);
            }
            let lin = g.dot(&z.row(row)) + &h;
            for k in 0..c {
                let eps = if spec.noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                y[[row, k]] = (softplus(lin[k]) + eps).max(0.0);
            }
            row += 1;
        }
    }
    let types: Vec<String> = (0..c).map(|k| format!("T{:02}", k + 1)).collect();
    let spots = SpotTable::new(spot_ids.clone(), sample_ids, patient_ids, coords, z)?;
    let abund = AbundanceMatrix::new(spot_ids, types, y)?;
    Ok((spots, abund))
}

/// Writes `spots.csv` and `abundances.csv` into `dir` and returns their paths.
pub fn write_synthetic(spec: &SyntheticSpec, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let (spots, abund) = generate_synthetic(spec)?;
    let dir = dir.as_ref();
    let sp = dir.join("spots.csv");
    let ab = dir.join("abundances.csv");
    write_spot_table(&spots, &sp)?;
    write_abundance_table(&abund, &ab)?;
    Ok((sp, ab))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_nonnegative() {
        let spec = SyntheticSpec { noise_sigma: 0.5, ..SyntheticSpec::default() };
        let (a_spots, a_ab) = generate_synthetic(&spec).unwrap();
        let (b_spots, b_ab) = generate_synthetic(&spec).unwrap();
        assert_eq!(a_spots, b_spots);
        assert_eq!(a_ab, b_ab);
        assert!(a_ab.values().iter().all(|&v| v >= 0.0));
        assert_eq!(a_spots.len(), 600);
        assert_eq!(a_spots.patients().len(), 3);
        assert_eq!(a_ab.n_types(), 5);
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let b = generate_synthetic(&SyntheticSpec { seed: 8, ..SyntheticSpec::default() }).unwrap();
        assert_ne!(a.1, b.1);
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(generate_synthetic(&SyntheticSpec { n_cell_types: 1, ..SyntheticSpec::default() }).is_err());
        assert!(generate_synthetic(&SyntheticSpec { noise_sigma: -1.0, ..SyntheticSpec::default() }).is_err());
    }
}
