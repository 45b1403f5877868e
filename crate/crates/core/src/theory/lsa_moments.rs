//! Closed-form Gaussian moments of the soft-threshold activation.
//!
//! For `X = μ + s·ε`, `ε ~ N(0,1)`, with `a₋ = (μ − b)/s` and `a₊ = (μ + b)/s`:
//!
//! ```text
//! E φ_b(X)    = (μ − b) Φ(a₋) + s φ(a₋) + (μ + b)(1 − Φ(a₊)) − s φ(a₊)
//! ∂/∂b E φ_b  = Φ(−a₋) − Φ(a₊)
//! E φ_b(X)²   = s² [(1 + a₋²) Φ(a₋) + a₋ φ(a₋)] + s² [(1 + a₊²)(1 − Φ(a₊)) − a₊ φ(a₊)]
//! ```

use crate::error::{Error, Result};
use crate::stats::{normal_cdf, normal_pdf};

fn check(sigma_bar: f64, b: f64) -> Result<()> {
    if !(sigma_bar > 0.0) {
        return Err(Error::InvalidParameter(format!("noise scale must be positive, got {sigma_bar}")));
    }
    if !(b >= 0.0) {
        return Err(Error::InvalidParameter(format!("threshold must be non-negative, got {b}")));
    }
    Ok(())
}

/// `E[φ_b(μ̄ + σ̄ ε)]`.
pub fn lsa_mean(mu_bar: f64, sigma_bar: f64, b: f64) -> Result<f64> {
    check(sigma_bar, b)?;
    let am = (mu_bar - b) / sigma_bar;
    let ap = (mu_bar + b) / sigma_bar;
    let eta1 = sigma_bar * normal_pdf(am);
    let eta2 = sigma_bar * normal_pdf(ap);
    Ok((mu_bar - b) * (1.0 - normal_cdf(-am)) + eta1 + (mu_bar + b) * (1.0 - normal_cdf(ap)) - eta2)
}

/// `∂/∂b E[φ_b(μ̄ + σ̄ ε)] = Φ((b − μ̄)/σ̄) − Φ((μ̄ + b)/σ̄)`.
pub fn lsa_mean_db(mu_bar: f64, sigma_bar: f64, b: f64) -> Result<f64> {
    check(sigma_bar, b)?;
    Ok(normal_cdf((b - mu_bar) / sigma_bar) - normal_cdf((mu_bar + b) / sigma_bar))
}

/// `E[φ_b(μ̄ + σ̄ ε)²]`.
pub fn lsa_second_moment(mu_bar: f64, sigma_bar: f64, b: f64) -> Result<f64> {
    check(sigma_bar, b)?;
    let s2 = sigma_bar * sigma_bar;
    let am = (mu_bar - b) / sigma_bar;
    let ap = (mu_bar + b) / sigma_bar;
    let upper = (1.0 + am * am) * normal_cdf(am) + am * normal_pdf(am);
    let lower = (1.0 + ap * ap) * normal_cdf(-ap) - ap * normal_pdf(ap);
    Ok(s2 * (upper + lower))
}
