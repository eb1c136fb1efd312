//! Central-difference verification of the analytic gradients.

use crate::error::Result;
use crate::matrix::Matrix;
use crate::rng::{streams, RngStream};

use super::{mse_loss, DropoutMasks, Network};

/// Central differences of the MSE loss with respect to every parameter,
/// holding the dropout masks fixed.
pub fn numerical_gradient(
    net: &Network,
    x: &Matrix,
    y: &Matrix,
    masks: &DropoutMasks,
    h: f64,
) -> Result<Vec<f64>> {
    let mut probe = net.clone();
    let mut out = Vec::with_capacity(net.parameter_count());
    for k in 0..net.parameter_count() {
        let orig = net.parameter(k);
        probe.set_parameter(k, orig + h);
        let (plus, _) = mse_loss(&probe.forward_with_masks(x, masks.clone())?.0, y)?;
        probe.set_parameter(k, orig - h);
        let (minus, _) = mse_loss(&probe.forward_with_masks(x, masks.clone())?.0, y)?;
        probe.set_parameter(k, orig);
        out.push((plus - minus) / (2.0 * h));
    }
    Ok(out)
}

/// `max_k |a_k - n_k| / max(|a_k|, |n_k|, 1e-8)`.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-8))
        .fold(0.0, f64::max)
}

/// Compares backprop against central differences with dropout masks drawn
/// once from `(seed, DROPOUT)` and frozen for every perturbation.
pub fn gradient_check(net: &Network, x: &Matrix, y: &Matrix, h: f64, seed: u64) -> Result<f64> {
    let masks = net.sample_masks(x.rows(), &mut RngStream::new(seed, streams::DROPOUT));
    let (pred, cache) = net.forward_with_masks(x, masks.clone())?;
    let (_, loss_grad) = mse_loss(&pred, y)?;
    let analytic = net.backward(&cache, &loss_grad)?.flatten();
    let numeric = numerical_gradient(net, x, y, &masks, h)?;
    Ok(max_relative_error(&analytic, &numeric))
}
