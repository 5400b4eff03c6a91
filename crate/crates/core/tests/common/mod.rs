#![allow(dead_code)]

use histocell::objective::{mae, mse, pearson_loss, LossWeights};
use histocell::regressor::{Dense, MlpModel, Standardizer};
use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Composite loss assembled from the three separately implemented terms.
pub fn oracle_loss(pred: ArrayView2<f64>, truth: ArrayView2<f64>, w: &LossWeights) -> f64 {
    mse(pred, truth).unwrap() + w.lambda1 * mae(pred, truth).unwrap() + w.lambda2 * pearson_loss(pred, truth, w.epsilon).unwrap()
}

/// Moran's R straight from the definition: Gaussian kernel on raw
/// coordinates, zero diagonal, rescaled to total mass n, then the double sum.
pub fn oracle_moran(coords: &[(f64, f64)], x: &[f64], y: &[f64], l: f64) -> f64 {
    let n = coords.len();
    let mut k = vec![vec![0.0; n]; n];
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d2 = (coords[i].0 - coords[j].0).powi(2) + (coords[i].1 - coords[j].1).powi(2);
                k[i][j] = (-d2 / (2.0 * l * l)).exp();
                total += k[i][j];
            }
        }
    }
    let xm = x.iter().sum::<f64>() / n as f64;
    let ym = y.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    for i in 0..n {
        for j in 0..n {
            num += n as f64 * k[i][j] / total * (x[i] - xm) * (y[j] - ym);
        }
    }
    let sx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sy: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    num / (sx * sy).sqrt()
}

/// A network with small random weights and non-zero biases.
pub fn random_model(dims: &[usize], seed: u64) -> MlpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = dims
        .windows(2)
        .map(|w| Dense {
            weight: Array2::from_shape_simple_fn((w[1], w[0]), || rng.gen_range(-0.8..0.8)),
            bias: Array1::from_shape_simple_fn(w[1], || rng.gen_range(-0.3..0.3)),
        })
        .collect();
    let std = Standardizer {
        means: Array1::zeros(dims[0]),
        stds: Array1::ones(dims[0]),
    };
    let types = (0..dims[dims.len() - 1]).map(|i| format!("T{i}")).collect();
    MlpModel::from_layers(layers, std, types, seed).unwrap()
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-1.0..1.0))
}

/// `|a - b| / max(|a|, |b|)`, and 0 when both are exactly 0.
pub fn rel_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale == 0.0 {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

/// Relative error of every parameter's analytic gradient against central
/// differences of the oracle loss with step `h`.
pub fn network_gradient_check(
    model: &MlpModel,
    x: ArrayView2<f64>,
    y: ArrayView2<f64>,
    w: &LossWeights,
    h: f64,
) -> Vec<f64> {
    let (_, grads) = model.loss_and_gradients(x, y, w).unwrap();
    let mut errors = Vec::new();
    let mut probe = model.clone();
    let eval = |m: &MlpModel| oracle_loss(m.forward(x).unwrap().view(), y, w);
    for (li, g) in grads.iter().enumerate() {
        for ((r, c), &a) in g.weight.indexed_iter() {
            let orig = probe.layers()[li].weight[[r, c]];
            probe.layers_mut()[li].weight[[r, c]] = orig + h;
            let up = eval(&probe);
            probe.layers_mut()[li].weight[[r, c]] = orig - h;
            let down = eval(&probe);
            probe.layers_mut()[li].weight[[r, c]] = orig;
            errors.push(rel_error(a, (up - down) / (2.0 * h)));
        }
        for (r, &a) in g.bias.indexed_iter() {
            let orig = probe.layers()[li].bias[r];
            probe.layers_mut()[li].bias[r] = orig + h;
            let up = eval(&probe);
            probe.layers_mut()[li].bias[r] = orig - h;
            let down = eval(&probe);
            probe.layers_mut()[li].bias[r] = orig;
            errors.push(rel_error(a, (up - down) / (2.0 * h)));
        }
    }
    errors
}
