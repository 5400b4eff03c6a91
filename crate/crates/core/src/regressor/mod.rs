//! Embedding → abundance regressor: input standardization, a seven-hidden-
//! layer SiLU MLP with a linear head, hand-written backpropagation and Adam.

mod adam;
mod checkpoint;
mod mlp;
mod standardizer;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{AbundanceMatrix, SampleSplit, SpotTable};
use crate::error::{Error, Result};
use crate::objective::LossWeights;

pub use adam::Adam;
pub use checkpoint::{checkpoint_to_string, load_checkpoint, save_checkpoint, CHECKPOINT_HEADER};
pub use mlp::{silu, silu_grad, sigmoid, Dense, ForwardCache, MlpModel, HIDDEN_LAYERS};
pub use standardizer::Standardizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Width of each of the seven hidden layers.
    pub hidden_width: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let w = LossWeights::default();
        Self {
            lambda1: w.lambda1,
            lambda2: w.lambda2,
            epsilon: w.epsilon,
            learning_rate: 1e-3,
            batch_size: 256,
            epochs: 50,
            seed: 0,
            hidden_width: 512,
        }
    }
}

impl TrainConfig {
    pub fn loss_weights(&self) -> LossWeights {
        LossWeights {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            epsilon: self.epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::Config("train.batch_size must be at least 2".into()));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 || !self.lambda1.is_finite() || !self.lambda2.is_finite() {
            return Err(Error::Config("train.lambda1 and train.lambda2 must be finite and >= 0".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config("train.epsilon must be > 0".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("train.learning_rate must be > 0".into()));
        }
        if self.hidden_width == 0 {
            return Err(Error::Config("train.hidden_width must be positive".into()));
        }
        Ok(())
    }

    pub fn layer_dims(&self, input: usize, output: usize) -> Vec<usize> {
        let mut dims = vec![input];
        dims.extend(std::iter::repeat_n(self.hidden_width, HIDDEN_LAYERS));
        dims.push(output);
        dims
    }
}

/// A trained model and the mean training loss of every epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub history: Vec<f64>,
}

/// Mini-batch boundaries over a shuffled order. A trailing batch of one row is
/// folded into the previous batch, since the correlation term needs two rows.
fn batches(n: usize, batch_size: usize) -> Vec<std::ops::Range<usize>> {
    let mut out: Vec<std::ops::Range<usize>> = (0..n)
        .step_by(batch_size)
        .map(|s| s..(s + batch_size).min(n))
        .collect();
    if out.len() > 1 && out.last().is_some_and(|r| r.len() < 2) {
        let tail = out.pop().unwrap();
        out.last_mut().unwrap().end = tail.end;
    }
    out
}

/// Trains on raw (unstandardized) embeddings `x` against abundances `y`.
pub fn fit(x: ArrayView2<f64>, y: ArrayView2<f64>, cell_types: Vec<String>, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if x.nrows() != y.nrows() {
        return Err(Error::Shape(format!("{} embedding rows but {} abundance rows", x.nrows(), y.nrows())));
    }
    if x.nrows() < 2 {
        return Err(Error::invalid("training needs at least 2 spots"));
    }
    let standardizer = Standardizer::fit(x)?;
    let xs = standardizer.transform(x)?;
    let dims = cfg.layer_dims(x.ncols(), y.ncols());
    let mut model = MlpModel::init(&dims, standardizer, cell_types, cfg.seed)?;
    let weights = cfg.loss_weights();
    let mut opt = Adam::new(cfg.learning_rate, model.layers());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for (b, range) in batches(order.len(), cfg.batch_size).into_iter().enumerate() {
            let rows = &order[range];
            let bx = xs.select(Axis(0), rows);
            let by = y.select(Axis(0), rows);
            let (loss, grads) = model.loss_and_gradients(bx.view(), by.view(), &weights).map_err(|e| {
                Error::Numerical(format!("epoch {epoch}, batch {b}: {e}"))
            })?;
            if !loss.total.is_finite() || grads.iter().any(|g| g.weight.iter().any(|v| !v.is_finite())) {
                return Err(Error::Numerical(format!("non-finite loss at epoch {epoch}, batch {b}")));
            }
            epoch_loss += loss.total * rows.len() as f64;
            opt.step(model.layers_mut(), &grads);
        }
        history.push(epoch_loss / order.len() as f64);
        log::debug!("epoch {epoch}: loss {:.6}", history[epoch]);
    }
    Ok(TrainOutcome { model, history })
}

/// Trains on the training rows of `split`.
pub fn train(spots: &SpotTable, abundances: &AbundanceMatrix, split: &SampleSplit, cfg: &TrainConfig) -> Result<TrainOutcome> {
    if abundances.spot_ids() != spots.spot_ids() {
        return Err(Error::Shape("abundance rows are not aligned with the spot table".into()));
    }
    if split.train.is_empty() {
        return Err(Error::invalid(format!("split {:?} has no training spots", split.name)));
    }
    let x = spots.embeddings().select(Axis(0), &split.train);
    let y = abundances.values().select(Axis(0), &split.train);
    fit(x.view(), y.view(), abundances.cell_types().to_vec(), cfg)
}

/// Standardizes and runs the network; negative outputs are set to zero when
/// `clamp` is set.
pub fn predict(model: &MlpModel, spots: &SpotTable, clamp: bool) -> Result<AbundanceMatrix> {
    let raw = predict_raw(model, spots.embeddings(), clamp)?;
    AbundanceMatrix::new(spots.spot_ids().to_vec(), model.cell_types.clone(), raw)
}

pub fn predict_raw(model: &MlpModel, x: ArrayView2<f64>, clamp: bool) -> Result<Array2<f64>> {
    let xs = model.standardizer.transform(x)?;
    let mut out = model.forward(xs.view())?;
    if clamp {
        out.mapv_inplace(|v| v.max(0.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    #[test]
    fn batch_tail_of_one_is_merged() {
        assert_eq!(batches(10, 4), vec![0..4, 4..8, 8..10]);
        assert_eq!(batches(9, 4), vec![0..4, 4..9]);
        assert_eq!(batches(3, 8), vec![0..3]);
    }

    fn toy() -> (Array2<f64>, Array2<f64>) {
        let x = Array2::from_shape_fn((40, 3), |(i, j)| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let y = Array2::from_shape_fn((40, 2), |(i, j)| x[[i, j]].abs() + 0.5 * x[[i, 2]].max(0.0));
        (x, y)
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            hidden_width: 8,
            batch_size: 8,
            epochs: 5,
            seed: 4,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let (x, y) = toy();
        let cfg = TrainConfig { epochs: 0, ..small_cfg() };
        let out = fit(x.view(), y.view(), vec!["a".into(), "b".into()], &cfg).unwrap();
        let init = MlpModel::init(
            &cfg.layer_dims(3, 2),
            Standardizer::fit(x.view()).unwrap(),
            vec!["a".into(), "b".into()],
            cfg.seed,
        )
        .unwrap();
        assert_eq!(out.model, init);
        assert!(out.history.is_empty());
    }

    #[test]
    fn training_is_bitwise_reproducible() {
        let (x, y) = toy();
        let a = fit(x.view(), y.view(), vec!["a".into(), "b".into()], &small_cfg()).unwrap();
        let b = fit(x.view(), y.view(), vec!["a".into(), "b".into()], &small_cfg()).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.history, b.history);
        assert_eq!(a.history.len(), 5);
    }

    #[test]
    fn loss_decreases_on_toy_problem() {
        let (x, y) = toy();
        let cfg = TrainConfig { epochs: 60, learning_rate: 3e-3, ..small_cfg() };
        let out = fit(x.view(), y.view(), vec!["a".into(), "b".into()], &cfg).unwrap();
        assert!(out.history.last().unwrap() < &out.history[0]);
    }

    #[test]
    fn rejects_batch_of_one() {
        let (x, y) = toy();
        let cfg = TrainConfig { batch_size: 1, ..small_cfg() };
        assert!(fit(x.view(), y.view(), vec!["a".into(), "b".into()], &cfg).is_err());
    }

    #[test]
    fn clamp_zeroes_negative_outputs() {
        let mut layers: Vec<Dense> = TrainConfig { hidden_width: 2, ..TrainConfig::default() }
            .layer_dims(1, 2)
            .windows(2)
            .map(|w| Dense::zeros(w[0], w[1]))
            .collect();
        layers[HIDDEN_LAYERS].bias = Array1::from(vec![-0.2, 0.3]);
        let std = Standardizer { means: Array1::zeros(1), stds: Array1::ones(1) };
        let model = MlpModel::from_layers(layers, std, vec!["a".into(), "b".into()], 0).unwrap();
        let x = Array2::from_elem((1, 1), 3.0);
        assert_eq!(predict_raw(&model, x.view(), false).unwrap().row(0).to_vec(), vec![-0.2, 0.3]);
        assert_eq!(predict_raw(&model, x.view(), true).unwrap().row(0).to_vec(), vec![0.0, 0.3]);
        assert!(predict_raw(&model, Array2::zeros((1, 2)).view(), false).is_err());
    }
}
