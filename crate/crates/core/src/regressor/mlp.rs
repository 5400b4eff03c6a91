use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Standardizer;
use crate::error::{Error, Result};
use crate::objective::{composite_loss, LossBreakdown, LossWeights};

/// Number of SiLU hidden layers in every model.
pub const HIDDEN_LAYERS: usize = 7;

/// One affine layer; `weight` is `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self {
            weight: Array2::zeros((output, input)),
            bias: Array1::zeros(output),
        }
    }

    pub fn n_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn silu(z: f64) -> f64 {
    z * sigmoid(z)
}

pub fn silu_grad(z: f64) -> f64 {
    let s = sigmoid(z);
    s * (1.0 + z * (1.0 - s))
}

/// Seven SiLU hidden layers followed by a linear head, plus the input
/// standardizer fitted on the training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<Dense>,
    pub standardizer: Standardizer,
    pub cell_types: Vec<String>,
    pub seed: u64,
}

/// Layer inputs and hidden pre-activations kept for the backward pass.
pub struct ForwardCache {
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

impl MlpModel {
    /// Glorot-uniform weights and zero biases drawn from `seed`.
    pub fn init(layer_dims: &[usize], standardizer: Standardizer, cell_types: Vec<String>, seed: u64) -> Result<Self> {
        check_dims(layer_dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = layer_dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                Dense {
                    weight: Array2::from_shape_simple_fn((fan_out, fan_in), || rng.gen_range(-limit..=limit)),
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Self::from_layers(layers, standardizer, cell_types, seed)
    }

    pub fn from_layers(layers: Vec<Dense>, standardizer: Standardizer, cell_types: Vec<String>, seed: u64) -> Result<Self> {
        if layers.len() != HIDDEN_LAYERS + 1 {
            return Err(Error::invalid(format!(
                "expected {} layers, got {}",
                HIDDEN_LAYERS + 1,
                layers.len()
            )));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.weight.nrows() {
                return Err(Error::Shape(format!("layer {i}: bias length does not match weight rows")));
            }
            if i > 0 && l.weight.ncols() != layers[i - 1].weight.nrows() {
                return Err(Error::Shape(format!("layer {i}: input width does not match previous layer")));
            }
            if l.weight.iter().chain(l.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("layer {i}: non-finite parameter")));
            }
        }
        if standardizer.dim() != layers[0].weight.ncols() {
            return Err(Error::Shape("standardizer width does not match the input layer".into()));
        }
        if cell_types.len() != layers[HIDDEN_LAYERS].weight.nrows() {
            return Err(Error::Shape("cell type count does not match the output layer".into()));
        }
        Ok(Self {
            layers,
            standardizer,
            cell_types,
            seed,
        })
    }

    /// `[D, h1, ..., h7, C]`
    pub fn layer_dims(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].weight.ncols())
            .chain(self.layers.iter().map(|l| l.weight.nrows()))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.ncols()
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Dense::n_params).sum()
    }

    /// Raw network output for already-standardized inputs.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward_cached(x)?.output)
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "model expects {} input columns, got {}",
                self.input_dim(),
                x.ncols()
            )));
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(HIDDEN_LAYERS);
        let mut a = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = a.dot(&layer.weight.t()) + &layer.bias;
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("non-finite activation in layer {}", i + 1)));
            }
            inputs.push(a);
            if i < HIDDEN_LAYERS {
                a = z.mapv(silu);
                pre.push(z);
            } else {
                return Ok(ForwardCache { inputs, pre, output: z });
            }
        }
        unreachable!("model always has an output layer")
    }

    /// Parameter gradients given ∂loss/∂output.
    pub fn backward(&self, cache: &ForwardCache, grad_out: ArrayView2<f64>) -> Vec<Dense> {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = grad_out.to_owned();
        for l in (0..self.layers.len()).rev() {
            let weight = g.t().dot(&cache.inputs[l]);
            let bias = g.sum_axis(Axis(0));
            if l > 0 {
                let mut upstream = g.dot(&self.layers[l].weight);
                upstream.zip_mut_with(&cache.pre[l - 1], |u, &z| *u *= silu_grad(z));
                g = upstream;
            }
            grads.push(Dense { weight, bias });
        }
        grads.reverse();
        grads
    }

    /// Composite loss of the network on standardized inputs `x` against
    /// `y`, and its gradient for every parameter.
    pub fn loss_and_gradients(
        &self,
        x: ArrayView2<f64>,
        y: ArrayView2<f64>,
        weights: &LossWeights,
    ) -> Result<(LossBreakdown, Vec<Dense>)> {
        let cache = self.forward_cached(x)?;
        let loss = composite_loss(cache.output.view(), y, weights)?;
        let grads = self.backward(&cache, loss.grad.view());
        Ok((loss, grads))
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() != HIDDEN_LAYERS + 2 {
        return Err(Error::invalid(format!(
            "layer_dims must list input, {HIDDEN_LAYERS} hidden widths and output ({} entries), got {}",
            HIDDEN_LAYERS + 2,
            dims.len()
        )));
    }
    if dims.contains(&0) {
        return Err(Error::invalid("layer widths must be positive"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    fn identity_standardizer(d: usize) -> Standardizer {
        Standardizer {
            means: Array1::zeros(d),
            stds: Array1::ones(d),
        }
    }

    fn types(c: usize) -> Vec<String> {
        (0..c).map(|i| format!("T{i}")).collect()
    }

    fn zero_model(dims: &[usize]) -> MlpModel {
        let layers = dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect();
        MlpModel::from_layers(layers, identity_standardizer(dims[0]), types(*dims.last().unwrap()), 0).unwrap()
    }

    #[test]
    fn silu_at_one() {
        assert!((silu(1.0) - 0.731_058_578_630_004_9).abs() < 1e-15);
        assert!((silu(1.0) - 1.0 / (1.0 + (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(silu(0.0), 0.0);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let m = zero_model(&[3, 4, 4, 4, 4, 4, 4, 4, 2]);
        let out = m.forward(array![[1.0, -2.0, 3.0], [0.5, 0.5, 0.5]].view()).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_chain_propagates_silu() {
        // One unit per layer, weights 1 on the first layer and 0 elsewhere
        // except the head, which reads the first hidden unit through ones.
        let mut m = zero_model(&[1, 1, 1, 1, 1, 1, 1, 1, 2]);
        let layers = m.layers_mut();
        for l in layers.iter_mut().take(HIDDEN_LAYERS) {
            l.weight[[0, 0]] = 1.0;
        }
        layers[HIDDEN_LAYERS].weight.fill(1.0);
        let out = m.forward(array![[1.0]].view()).unwrap();
        let mut expect = 1.0;
        for _ in 0..HIDDEN_LAYERS {
            expect = silu(expect);
        }
        assert_eq!(out[[0, 0]], expect);
        let cache = m.forward_cached(array![[1.0]].view()).unwrap();
        assert_eq!(cache.pre[0][[0, 0]], 1.0);
        assert!((cache.inputs[1][[0, 0]] - 0.731_059).abs() < 1e-6);
    }

    #[test]
    fn equal_rows_give_equal_outputs() {
        let m = MlpModel::init(&[3, 5, 5, 5, 5, 5, 5, 5, 2], identity_standardizer(3), types(2), 9).unwrap();
        let out = m.forward(array![[0.3, -1.0, 2.0], [0.3, -1.0, 2.0]].view()).unwrap();
        assert_eq!(out.row(0), out.row(1));
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let dims = [4, 6, 6, 6, 6, 6, 6, 6, 3];
        let a = MlpModel::init(&dims, identity_standardizer(4), types(3), 11).unwrap();
        let b = MlpModel::init(&dims, identity_standardizer(4), types(3), 11).unwrap();
        let c = MlpModel::init(&dims, identity_standardizer(4), types(3), 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.layer_dims(), dims);
        let limit = (6.0f64 / 10.0).sqrt();
        assert!(a.layers()[0].weight.iter().all(|w| w.abs() <= limit));
        assert!(a.layers().iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn rejects_wrong_depth() {
        assert!(MlpModel::init(&[3, 4, 2], identity_standardizer(3), types(2), 0).is_err());
    }
}
