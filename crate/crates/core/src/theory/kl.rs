use crate::error::{Error, Result};

/// KL divergence between two transformed static-signal distributions whose
/// signed means are `u_mean` and `v_mean` (both unit vectors in `R^{kd}`):
/// `(1 − uᵀv) / σ²`.
pub fn kl_transformed_ssd(u_mean: &[f64], v_mean: &[f64], sigma: f64) -> Result<f64> {
    if u_mean.len() != v_mean.len() {
        return Err(Error::ShapeMismatch { expected: u_mean.len(), got: v_mean.len() });
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    for v in [u_mean, v_mean] {
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("mean must be unit norm, got {n}")));
        }
    }
    let cos: f64 = u_mean.iter().zip(v_mean).map(|(a, b)| a * b).sum();
    Ok(((1.0 - cos) / (sigma * sigma)).max(0.0))
}
