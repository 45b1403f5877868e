use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{dot, ModelKind, ModelParams};

/// Threshold at which the relaxed semi-metric implication is stated.
pub const SEMI_METRIC_DELTA: f64 = 1e-2;

/// `(1 − max(0, ‖w₁‖ cos α₁))²` where `cos α₁` is the angle between the
/// first LCN node and `signal_dir`. Lower-bounds the risk of the LCN on the
/// static distribution whose signal sits in patch 0 along `signal_dir`,
/// provided `‖w₁‖ ≤ 1` as in the model class.
pub fn risk_floor(params: &ModelParams, signal_dir: &[f64]) -> Result<f64> {
    if params.kind != ModelKind::Lcn {
        return Err(Error::Incompatible(format!("risk floor is defined for LCN, got {}", params.kind)));
    }
    let w1 = &params.weights[0];
    if signal_dir.len() != w1.len() {
        return Err(Error::ShapeMismatch { expected: w1.len(), got: signal_dir.len() });
    }
    // ‖w₁‖ cos α₁ = w₁ᵀ u
    let projected = dot(w1, signal_dir);
    let r = 1.0 - projected.max(0.0);
    Ok(r * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiMetricReport {
    pub rho_u: f64,
    pub rho_v: f64,
    pub delta: f64,
    /// `rho_u < δ ⇒ rho_v > δ`.
    pub holds: bool,
}

/// Evaluates the risk floor against two nearly orthogonal signal directions
/// and checks that being close to one forces being far from the other.
pub fn semi_metric_check(params: &ModelParams, u: &[f64], v: &[f64]) -> Result<SemiMetricReport> {
    if dot(u, v) >= 1e-3 {
        return Err(Error::InvalidParameter("directions must satisfy uᵀv < 1e-3".into()));
    }
    for w in [u, v] {
        let n = dot(w, w).sqrt();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("direction must be unit norm, got {n}")));
        }
    }
    let rho_u = risk_floor(params, u)?;
    let rho_v = risk_floor(params, v)?;
    let delta = SEMI_METRIC_DELTA;
    Ok(SemiMetricReport { rho_u, rho_v, delta, holds: !(rho_u < delta) || rho_v > delta })
}
