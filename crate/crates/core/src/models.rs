//! LSA activation and the three one-hidden-layer models.
//!
//! With `φ_b(t) = ReLU(t − b) − ReLU(−t − b)`:
//!
//! ```text
//! FCN: f(x) = Σ_i φ_b(w_iᵀ x)          w_i ∈ R^{kd}, i = 1..k
//! LCN: f(x) = Σ_i φ_b(w_iᵀ x^(i))      w_i ∈ R^d,    i = 1..k
//! CNN: f(x) = Σ_i φ_b(wᵀ x^(i))        w   ∈ R^d
//! ```
//!
//! Loss is mean squared error against ±1 labels. The bias is a schedule
//! parameter and is never differentiated.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::{Distribution, LabeledSample, Sampler, TaskSpec};
use crate::error::{Error, Result};
use crate::patchspace::PatchShape;
use crate::stats::Welford;

/// Soft-threshold activation: `x − b` above `b`, `x + b` below `−b`, zero in between.
pub fn lsa(x: f64, b: f64) -> Result<f64> {
    if !(b >= 0.0) {
        return Err(Error::InvalidParameter(format!("LSA threshold must be non-negative, got {b}")));
    }
    Ok(lsa_unchecked(x, b))
}

#[inline]
pub(crate) fn lsa_unchecked(x: f64, b: f64) -> f64 {
    if x > b {
        x - b
    } else if x < -b {
        x + b
    } else {
        0.0
    }
}

/// A.e. derivative of [`lsa`]; 0 on the closed dead zone `|x| ≤ b`.
pub fn lsa_deriv(x: f64, b: f64) -> f64 {
    if x.abs() > b {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "FCN")]
    Fcn,
    #[serde(rename = "LCN")]
    Lcn,
    #[serde(rename = "CNN")]
    Cnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Fcn, ModelKind::Lcn, ModelKind::Cnn];

    pub fn weight_count(self, shape: PatchShape) -> usize {
        match self {
            ModelKind::Fcn | ModelKind::Lcn => shape.k,
            ModelKind::Cnn => 1,
        }
    }

    pub fn weight_dim(self, shape: PatchShape) -> usize {
        match self {
            ModelKind::Fcn => shape.dim(),
            ModelKind::Lcn | ModelKind::Cnn => shape.d,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Fcn => "FCN",
            ModelKind::Lcn => "LCN",
            ModelKind::Cnn => "CNN",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fcn" => Ok(ModelKind::Fcn),
            "lcn" => Ok(ModelKind::Lcn),
            "cnn" => Ok(ModelKind::Cnn),
            other => Err(Error::InvalidParameter(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct ModelParams {
    pub kind: ModelKind,
    pub shape: PatchShape,
    pub weights: Vec<Vec<f64>>,
    pub bias: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    kind: ModelKind,
    k: usize,
    d: usize,
    weights: Vec<Vec<f64>>,
    bias: f64,
}

impl From<ModelParams> for ParamsRepr {
    fn from(p: ModelParams) -> Self {
        ParamsRepr { kind: p.kind, k: p.shape.k, d: p.shape.d, weights: p.weights, bias: p.bias }
    }
}

impl TryFrom<ParamsRepr> for ModelParams {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        ModelParams::new(r.kind, PatchShape::new(r.k, r.d)?, r.weights, r.bias)
    }
}

impl ModelParams {
    /// Checks layout and `b ≥ 0`; weight norms are not constrained here.
    pub fn new(kind: ModelKind, shape: PatchShape, weights: Vec<Vec<f64>>, bias: f64) -> Result<Self> {
        let count = kind.weight_count(shape);
        if weights.len() != count {
            return Err(Error::ShapeMismatch { expected: count, got: weights.len() });
        }
        let dim = kind.weight_dim(shape);
        if let Some(w) = weights.iter().find(|w| w.len() != dim) {
            return Err(Error::ShapeMismatch { expected: dim, got: w.len() });
        }
        if !(bias >= 0.0) {
            return Err(Error::InvalidParameter(format!("bias must be non-negative, got {bias}")));
        }
        Ok(Self { kind, shape, weights, bias })
    }

    pub fn zeros(kind: ModelKind, shape: PatchShape) -> Self {
        let weights = vec![vec![0.0; kind.weight_dim(shape)]; kind.weight_count(shape)];
        Self { kind, shape, weights, bias: 0.0 }
    }

    /// CNN whose shared weight is `w`.
    pub fn cnn(shape: PatchShape, w: Vec<f64>, bias: f64) -> Result<Self> {
        Self::new(ModelKind::Cnn, shape, vec![w], bias)
    }

    pub fn weight_norms(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        self.shape.check_len(x)
    }

    /// Pre-activations of every hidden unit (one per node for FCN/LCN, one per
    /// patch for CNN) written into `out` (length `k`).
    #[inline]
    pub(crate) fn preactivations_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.shape.d;
        match self.kind {
            ModelKind::Fcn => {
                for (o, w) in out.iter_mut().zip(&self.weights) {
                    *o = dot(w, x);
                }
            }
            ModelKind::Lcn => {
                for (i, (o, w)) in out.iter_mut().zip(&self.weights).enumerate() {
                    *o = dot(w, &x[i * d..(i + 1) * d]);
                }
            }
            ModelKind::Cnn => {
                let w = &self.weights[0];
                for (i, o) in out.iter_mut().enumerate() {
                    *o = dot(w, &x[i * d..(i + 1) * d]);
                }
            }
        }
    }

    #[inline]
    pub(crate) fn forward_with(&self, x: &[f64], pre: &mut [f64]) -> f64 {
        self.preactivations_into(x, pre);
        pre.iter().map(|&p| lsa_unchecked(p, self.bias)).sum()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn forward(params: &ModelParams, x: &[f64]) -> Result<f64> {
    params.check_input(x)?;
    let mut pre = vec![0.0; params.shape.k];
    Ok(params.forward_with(x, &mut pre))
}

fn check_samples(params: &ModelParams, data: &[LabeledSample]) -> Result<()> {
    if let Some(s) = data.iter().find(|s| s.x.len() != params.shape.dim()) {
        return Err(Error::ShapeMismatch { expected: params.shape.dim(), got: s.x.len() });
    }
    Ok(())
}

/// `(1/n) Σ_j (y_j − f(x_j))²`.
pub fn empirical_loss(params: &ModelParams, data: &[LabeledSample]) -> Result<f64> {
    check_samples(params, data)?;
    if data.is_empty() {
        return Err(Error::InvalidParameter("loss of an empty dataset".into()));
    }
    let mut pre = vec![0.0; params.shape.k];
    let total: f64 = data
        .iter()
        .map(|s| {
            let r = s.y - params.forward_with(&s.x, &mut pre);
            r * r
        })
        .sum();
    Ok(total / data.len() as f64)
}

/// Loss and its gradient with respect to every weight vector.
pub(crate) fn loss_and_grad(params: &ModelParams, data: &[LabeledSample]) -> (f64, Vec<Vec<f64>>) {
    let shape = params.shape;
    let d = shape.d;
    let m = data.len() as f64;
    let mut grad = vec![vec![0.0; params.kind.weight_dim(shape)]; params.kind.weight_count(shape)];
    let mut pre = vec![0.0; shape.k];
    let mut loss = 0.0;
    for s in data {
        let f = params.forward_with(&s.x, &mut pre);
        let r = s.y - f;
        loss += r * r;
        let coef = -2.0 * r / m;
        match params.kind {
            ModelKind::Fcn => {
                for (g, &p) in grad.iter_mut().zip(&pre) {
                    if p.abs() > params.bias {
                        axpy(coef, &s.x, g);
                    }
                }
            }
            ModelKind::Lcn => {
                for (i, (g, &p)) in grad.iter_mut().zip(&pre).enumerate() {
                    if p.abs() > params.bias {
                        axpy(coef, &s.x[i * d..(i + 1) * d], g);
                    }
                }
            }
            ModelKind::Cnn => {
                let g = &mut grad[0];
                for (i, &p) in pre.iter().enumerate() {
                    if p.abs() > params.bias {
                        axpy(coef, &s.x[i * d..(i + 1) * d], g);
                    }
                }
            }
        }
    }
    (loss / m, grad)
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Analytic gradient of [`empirical_loss`] using [`lsa_deriv`] as the derivative.
/// Layout matches `params.weights`.
pub fn grad_loss(params: &ModelParams, data: &[LabeledSample]) -> Result<Vec<Vec<f64>>> {
    check_samples(params, data)?;
    if data.is_empty() {
        return Err(Error::InvalidParameter("gradient of an empty dataset".into()));
    }
    Ok(loss_and_grad(params, data).1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

/// Monte Carlo estimate of `E[(y − f(x))²]` under `dist`, with standard error
/// `sample_std / sqrt(n_test)`.
pub fn risk_mc<R: Rng + ?Sized>(
    params: &ModelParams,
    spec: &TaskSpec,
    dist: &Distribution,
    n_test: usize,
    rng: &mut R,
) -> Result<RiskEstimate> {
    if params.shape != spec.shape {
        return Err(Error::Incompatible(format!("model shape {:?} vs task shape {:?}", params.shape, spec.shape)));
    }
    if n_test == 0 {
        return Err(Error::InvalidParameter("n_test must be positive".into()));
    }
    let mut sampler = Sampler::new(spec, dist)?;
    let mut x = vec![0.0; spec.dim()];
    let mut pre = vec![0.0; spec.shape.k];
    let mut acc = Welford::default();
    for _ in 0..n_test {
        let (y, _) = sampler.draw_into(rng, &mut x);
        let r = y - params.forward_with(&x, &mut pre);
        acc.push(r * r);
    }
    Ok(RiskEstimate { mean: acc.mean(), se: acc.se(), n: n_test })
}
