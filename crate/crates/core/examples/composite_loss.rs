//! The training objective on a small batch: its three terms, the analytic
//! gradient and a central finite-difference check of that gradient.

use histocell::objective::{composite_loss, LossWeights};
use ndarray::array;

fn main() -> histocell::Result<()> {
    let truth = array![[0.1, 2.0, 0.5], [0.4, 1.0, 0.5], [0.9, 0.0, 0.7], [0.2, 3.0, 0.1]];
    let pred = array![[0.3, 1.5, 0.4], [0.2, 1.2, 0.6], [1.1, 0.4, 0.6], [0.0, 2.5, 0.3]];
    let w = LossWeights::default();

    let loss = composite_loss(pred.view(), truth.view(), &w)?;
    println!("mse {:.6}  mae {:.6}  pearson {:.6}", loss.mse, loss.mae, loss.pearson);
    println!("total = mse + {}*mae + {}*pearson = {:.6}", w.lambda1, w.lambda2, loss.total);

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for ((i, j), g) in loss.grad.indexed_iter() {
        let mut up = pred.clone();
        up[[i, j]] += h;
        let mut down = pred.clone();
        down[[i, j]] -= h;
        let fd = (composite_loss(up.view(), truth.view(), &w)?.total - composite_loss(down.view(), truth.view(), &w)?.total)
            / (2.0 * h);
        worst = worst.max((fd - g).abs());
    }
    println!("largest |analytic - finite difference| = {worst:.2e}");
    Ok(())
}
