use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoInputs {
    /// Separation level δ.
    pub delta: f64,
    /// Sample count.
    pub n: f64,
    /// Bound on pairwise KL divergence.
    pub kl_bound: f64,
    /// Packing cardinality, ≥ 2. Stored as `ln M` so that astronomically
    /// large packings stay representable.
    pub ln_cardinality: f64,
}

impl FanoInputs {
    pub fn new(delta: f64, n: f64, kl_bound: f64, cardinality: f64) -> Result<Self> {
        Self::with_ln_cardinality(delta, n, kl_bound, cardinality.ln())
    }

    pub fn with_ln_cardinality(delta: f64, n: f64, kl_bound: f64, ln_cardinality: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        if !(kl_bound >= 0.0) || !(n >= 0.0) {
            return Err(Error::InvalidParameter("n and the KL bound must be non-negative".into()));
        }
        if !(ln_cardinality >= std::f64::consts::LN_2) {
            return Err(Error::InvalidParameter("packing cardinality must be at least 2".into()));
        }
        Ok(Self { delta, n, kl_bound, ln_cardinality })
    }
}

/// `δ (1 − (n·D + ln 2) / ln M)`. May be negative; callers clamp if they need to.
pub fn fano_lower_bound(inp: &FanoInputs) -> f64 {
    inp.delta * (1.0 - (inp.n * inp.kl_bound + std::f64::consts::LN_2) / inp.ln_cardinality)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_samples_two_hypotheses_is_zero() {
        let b = fano_lower_bound(&FanoInputs::new(0.7, 0.0, 3.0, 2.0).unwrap());
        assert!(b.abs() < 1e-15);
    }

    #[test]
    fn zero_divergence_plug_in() {
        let inp = FanoInputs::with_ln_cardinality(0.4, 10.0, 0.0, 2.0).unwrap();
        assert!((fano_lower_bound(&inp) - 0.4 * (1.0 - std::f64::consts::LN_2 / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn fcn_instantiation() {
        // δ = 1/4, D = 1/(2σ²), ln M = 0.15·kd with σ = 1, k = d = 10.
        for n in [0.0, 1.0, 5.0, 20.0] {
            let inp = FanoInputs::with_ln_cardinality(0.25, n, 0.5, 0.15 * 100.0).unwrap();
            let expected = 0.25 * (1.0 - (n / 2.0 + std::f64::consts::LN_2) / 15.0);
            assert!((fano_lower_bound(&inp) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(FanoInputs::new(0.0, 1.0, 1.0, 4.0).is_err());
        assert!(FanoInputs::new(1.0, 1.0, -1.0, 4.0).is_err());
        assert!(FanoInputs::new(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn monotone_on_grid() {
        let ns = [0.0, 1.0, 10.0, 100.0];
        let ds = [0.0, 0.01, 0.5, 2.0];
        let lms = [1.0, 5.0, 50.0, 500.0];
        for &n in &ns {
            for &d in &ds {
                for w in lms.windows(2) {
                    let a = fano_lower_bound(&FanoInputs::with_ln_cardinality(1.0, n, d, w[0]).unwrap());
                    let b = fano_lower_bound(&FanoInputs::with_ln_cardinality(1.0, n, d, w[1]).unwrap());
                    assert!(b >= a);
                }
            }
        }
        for &lm in &lms {
            for &d in &ds {
                for w in ns.windows(2) {
                    let a = fano_lower_bound(&FanoInputs::with_ln_cardinality(1.0, w[0], d, lm).unwrap());
                    let b = fano_lower_bound(&FanoInputs::with_ln_cardinality(1.0, w[1], d, lm).unwrap());
                    assert!(b <= a);
                }
            }
            for &n in &ns {
                for w in ds.windows(2) {
                    let a = fano_lower_bound(&FanoInputs::with_ln_cardinality(1.0, n, w[0], lm).unwrap());
                    let b = fano_lower_bound(&FanoInputs::with_ln_cardinality(1.0, n, w[1], lm).unwrap());
                    assert!(b <= a);
                }
            }
        }
    }
}
