use alloc::vec::Vec;

use crate::{Error, Result};

/// Squared error `‖x − x̂‖²` divided by the vector length.
pub fn mse_loss(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(Error::shape("mse operands", x.len(), x_hat.len()));
    }
    if x.is_empty() {
        return Err(Error::invalid("mse of empty vectors"));
    }
    let sum: f64 = x
        .iter()
        .zip(x_hat)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum();
    Ok(sum / x.len() as f64)
}

/// Gradient of [`mse_loss`] with respect to `x_hat`, scaled by `scale`.
pub fn mse_loss_grad(x: &[f64], x_hat: &[f64], scale: f64) -> Result<Vec<f64>> {
    if x.len() != x_hat.len() {
        return Err(Error::shape("mse operands", x.len(), x_hat.len()));
    }
    let k = 2.0 * scale / x.len() as f64;
    Ok(x.iter().zip(x_hat).map(|(a, b)| k * (b - a)).collect())
}
