use super::Dense;

/// Adam with bias-corrected first and second moments.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: i32,
    m: Vec<Dense>,
    v: Vec<Dense>,
}

impl Adam {
    pub fn new(learning_rate: f64, params: &[Dense]) -> Self {
        let zeros = || {
            params
                .iter()
                .map(|p| Dense::zeros(p.weight.ncols(), p.weight.nrows()))
                .collect::<Vec<_>>()
        };
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn step(&mut self, params: &mut [Dense], grads: &[Dense]) {
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let lr = self.learning_rate;
        let eps = self.epsilon;
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            ndarray::Zip::from(&mut p.weight)
                .and(&g.weight)
                .and(&mut m.weight)
                .and(&mut v.weight)
                .for_each(|p, &g, m, v| update(p, g, m, v));
            ndarray::Zip::from(&mut p.bias)
                .and(&g.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .for_each(|p, &g, m, v| update(p, g, m, v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn first_step_moves_by_learning_rate() {
        // With bias correction the first update is lr * g/|g| (up to eps).
        let mut params = vec![Dense { weight: array![[1.0, -1.0]], bias: array![0.5] }];
        let grads = vec![Dense { weight: array![[2.0, -0.1]], bias: array![0.0] }];
        let mut opt = Adam::new(0.01, &params);
        opt.step(&mut params, &grads);
        assert!((params[0].weight[[0, 0]] - 0.99).abs() < 1e-9);
        assert!((params[0].weight[[0, 1]] + 0.99).abs() < 1e-9);
        assert_eq!(params[0].bias[0], 0.5);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut params = vec![Dense { weight: array![[3.0]], bias: array![-2.0] }];
        let mut opt = Adam::new(0.05, &params);
        for _ in 0..2000 {
            let g = vec![Dense {
                weight: params[0].weight.mapv(|w| 2.0 * (w - 1.0)),
                bias: params[0].bias.mapv(|b| 2.0 * b),
            }];
            opt.step(&mut params, &g);
        }
        assert!((params[0].weight[[0, 0]] - 1.0).abs() < 1e-3);
        assert!(params[0].bias[0].abs() < 1e-3);
    }
}
