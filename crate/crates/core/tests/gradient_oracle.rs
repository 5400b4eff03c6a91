mod common;

use common::{network_gradient_check, oracle_loss, random_matrix, random_model, rel_error};
use histocell::objective::{composite_loss, LossWeights};

#[test]
fn composite_gradient_matches_finite_differences() {
    let truth = random_matrix(7, 4, 1).mapv(f64::abs);
    let pred = random_matrix(7, 4, 2);
    for w in [
        LossWeights::default(),
        LossWeights { lambda1: 0.0, lambda2: 0.0, epsilon: 1e-8 },
        LossWeights { lambda1: 2.0, lambda2: 3.0, epsilon: 1e-8 },
    ] {
        let loss = composite_loss(pred.view(), truth.view(), &w).unwrap();
        assert!((loss.total - oracle_loss(pred.view(), truth.view(), &w)).abs() < 1e-12);
        let h = 1e-6;
        for ((i, j), &g) in loss.grad.indexed_iter() {
            let mut up = pred.clone();
            up[[i, j]] += h;
            let mut down = pred.clone();
            down[[i, j]] -= h;
            let fd = (oracle_loss(up.view(), truth.view(), &w) - oracle_loss(down.view(), truth.view(), &w)) / (2.0 * h);
            assert!(rel_error(g, fd) < 1e-5, "({i},{j}) analytic {g} numeric {fd}");
        }
    }
}

#[test]
fn network_gradient_matches_finite_differences_for_several_seeds() {
    let dims = [3, 5, 5, 5, 5, 5, 5, 5, 2];
    for seed in 0..3 {
        let model = random_model(&dims, seed);
        let x = random_matrix(5, 3, 100 + seed);
        let y = random_matrix(5, 2, 200 + seed).mapv(f64::abs);
        let errors = network_gradient_check(&model, x.view(), y.view(), &LossWeights::default(), 1e-5);
        assert_eq!(errors.len(), model.n_params());
        let worst = errors.iter().cloned().fold(0.0, f64::max);
        assert!(worst < 1e-4, "seed {seed}: worst relative error {worst:e}");
    }
}
