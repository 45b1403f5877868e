//! Projected full-batch gradient training.
//!
//! Every iteration replaces each weight vector by its normalized gradient step
//!
//! ```text
//! w_i ← (w_i − η_t ∇_{w_i} l(v; S_t)) / ‖w_i − η_t ∇_{w_i} l(v; S_t)‖,   b ← b_t
//! ```
//!
//! where the gradient is taken with the bias in effect *before* the update
//! (zero at the first step). The two-phase trainers are this loop with `T = 2`,
//! disjoint halves of the data and fixed constants for `η_t` and `b_t`.

use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{mu_vector, Dataset, LabeledSample, TaskSpec};
use crate::error::{Error, Result};
use crate::models::{dot, empirical_loss, loss_and_grad, ModelKind, ModelParams};
use crate::patchspace::PatchShape;
use crate::rng::seeded;

/// Post-step norms below this are treated as a degenerate projection.
pub const DEGENERATE_NORM: f64 = 1e-14;

/// Default iteration budget for grid-search training. Longer runs drift
/// towards the empirical risk minimizer, whose direction error barely
/// depends on the number of patches at moderate noise.
pub const GRID_ITERATIONS: usize = 50;

pub const DEFAULT_WEIGHT_LRS: [f64; 3] = [1e-1, 1e-2, 1e-3];
pub const DEFAULT_BIAS_GRID: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPolicy {
    /// Iteration `t` sees the `t`-th of `T` equal consecutive chunks
    /// (halves for the two-phase trainers). Trailing samples that do not fill
    /// a chunk are dropped.
    Halves,
    /// Every iteration sees the whole dataset.
    Whole,
}

/// Early stop when the loss improved by less than `rel_tol` (relative) over
/// the last `window` iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauRule {
    pub window: usize,
    pub rel_tol: f64,
}

impl Default for PlateauRule {
    fn default() -> Self {
        Self { window: 10, rel_tol: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSchedule {
    pub step_sizes: Vec<f64>,
    pub biases: Vec<f64>,
    pub init_variance: f64,
    pub split: SplitPolicy,
    pub seed: u64,
    #[serde(default)]
    pub plateau: Option<PlateauRule>,
}

/// `1 / (100 k² d²)`, the initialization variance of the two-phase trainers.
pub fn small_init_variance(shape: PatchShape) -> f64 {
    let (k, d) = (shape.k as f64, shape.d as f64);
    1.0 / (100.0 * k * k * d * d)
}

impl TrainSchedule {
    pub fn new(step_sizes: Vec<f64>, biases: Vec<f64>, init_variance: f64, split: SplitPolicy, seed: u64) -> Result<Self> {
        if step_sizes.len() != biases.len() {
            return Err(Error::InvalidParameter(format!(
                "{} step sizes but {} biases",
                step_sizes.len(),
                biases.len()
            )));
        }
        if !(init_variance > 0.0) {
            return Err(Error::InvalidParameter(format!("init variance must be positive, got {init_variance}")));
        }
        if biases.iter().any(|b| !(*b >= 0.0)) {
            return Err(Error::InvalidParameter("biases must be non-negative".into()));
        }
        Ok(Self { step_sizes, biases, init_variance, split, seed, plateau: None })
    }

    /// `η = (1, k·10³)`, `b = ((1/32)·sqrt((k+d) ln(kd) / (kd)), 10⁻⁴)`.
    pub fn two_phase_lcn(shape: PatchShape, seed: u64) -> Self {
        let (k, d) = (shape.k as f64, shape.d as f64);
        let l = (k * d).ln();
        let b1 = ((k + d) * l / (k * d)).sqrt() / 32.0;
        Self::new(vec![1.0, k * 1e3], vec![b1, 1e-4], small_init_variance(shape), SplitPolicy::Halves, seed)
            .expect("constants are valid")
    }

    /// `η = (1, 10³)`, `b = ((1/100)·sqrt(kd / ((k+d) ln(kd))), 10⁻⁴)`.
    pub fn two_phase_cnn(shape: PatchShape, seed: u64) -> Self {
        let (k, d) = (shape.k as f64, shape.d as f64);
        let l = (k * d).ln();
        let b1 = (k * d / ((k + d) * l)).sqrt() / 100.0;
        Self::new(vec![1.0, 1e3], vec![b1, 1e-4], small_init_variance(shape), SplitPolicy::Halves, seed)
            .expect("constants are valid")
    }

    /// Constant step size and bias over the whole dataset.
    pub fn constant(iterations: usize, lr: f64, bias: f64, init_variance: f64, seed: u64) -> Result<Self> {
        Self::new(vec![lr; iterations], vec![bias; iterations], init_variance, SplitPolicy::Whole, seed)
    }

    pub fn with_plateau(mut self, rule: PlateauRule) -> Self {
        self.plateau = Some(rule);
        self
    }

    pub fn iterations(&self) -> usize {
        self.step_sizes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub params: ModelParams,
    /// Per-node alignment with the signal after each completed iteration.
    pub alignment_per_iter: Vec<Vec<f64>>,
    /// Training loss of the chunk used at each iteration, at the pre-update parameters.
    pub loss_per_iter: Vec<f64>,
    pub schedule: TrainSchedule,
    pub seed: u64,
    /// Number of weight vectors whose projection fell back to the pre-step direction.
    pub degenerate_events: usize,
}

impl TrainResult {
    pub fn iterations_run(&self) -> usize {
        self.loss_per_iter.len()
    }

    pub fn final_alignment(&self) -> Vec<f64> {
        self.alignment_per_iter.last().cloned().unwrap_or_default()
    }
}

/// Gaussian weights with per-coordinate variance `γ`, bias 0.
pub fn init_params<R: Rng + ?Sized>(kind: ModelKind, shape: PatchShape, gamma: f64, rng: &mut R) -> Result<ModelParams> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("init variance must be positive, got {gamma}")));
    }
    let sd = gamma.sqrt();
    let weights = (0..kind.weight_count(shape))
        .map(|_| {
            (0..kind.weight_dim(shape))
                .map(|_| {
                    let e: f64 = StandardNormal.sample(rng);
                    sd * e
                })
                .collect()
        })
        .collect();
    ModelParams::new(kind, shape, weights, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedStep {
    pub params: ModelParams,
    /// Nodes whose post-step vector was (numerically) zero.
    pub degenerate_nodes: Vec<usize>,
}

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let n = dot(v, v).sqrt();
    (n >= DEGENERATE_NORM && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

/// One projected step: `w_i ← normalize(w_i − η g_i)`, bias set to `b_next`.
/// A vanishing post-step vector falls back to the normalized pre-step vector
/// and is reported; if that is zero too the update fails.
pub fn projected_update(params: &ModelParams, eta: f64, b_next: f64, grad: &[Vec<f64>]) -> Result<ProjectedStep> {
    if grad.len() != params.weights.len() {
        return Err(Error::ShapeMismatch { expected: params.weights.len(), got: grad.len() });
    }
    if !(b_next >= 0.0) {
        return Err(Error::InvalidParameter(format!("bias must be non-negative, got {b_next}")));
    }
    let mut degenerate_nodes = Vec::new();
    let mut weights = Vec::with_capacity(params.weights.len());
    for (i, (w, g)) in params.weights.iter().zip(grad).enumerate() {
        if g.len() != w.len() {
            return Err(Error::ShapeMismatch { expected: w.len(), got: g.len() });
        }
        let step: Vec<f64> = w.iter().zip(g).map(|(a, b)| a - eta * b).collect();
        match normalized(&step) {
            Some(v) => weights.push(v),
            None => {
                degenerate_nodes.push(i);
                weights.push(normalized(w).ok_or_else(|| {
                    Error::DegenerateUpdate(format!("node {i} has zero weight before and after the step"))
                })?);
            }
        }
    }
    Ok(ProjectedStep {
        params: ModelParams { kind: params.kind, shape: params.shape, weights, bias: b_next },
        degenerate_nodes,
    })
}

/// Per-node cosine with the signal. LCN/CNN nodes are compared with `w*`;
/// FCN nodes with the best-matching `μ_t`. Zero vectors score 0.
pub fn alignment(params: &ModelParams, spec: &TaskSpec) -> Result<Vec<f64>> {
    if params.shape != spec.shape {
        return Err(Error::Incompatible(format!("model shape {:?} vs task shape {:?}", params.shape, spec.shape)));
    }
    let cos = |w: &[f64], target: &[f64]| {
        let n = dot(w, w).sqrt();
        if n == 0.0 {
            0.0
        } else {
            dot(w, target) / n
        }
    };
    match params.kind {
        ModelKind::Lcn | ModelKind::Cnn => Ok(params.weights.iter().map(|w| cos(w, &spec.signal)).collect()),
        ModelKind::Fcn => {
            let mus = (0..spec.shape.k).map(|t| mu_vector(spec, t)).collect::<Result<Vec<_>>>()?;
            Ok(params
                .weights
                .iter()
                .map(|w| mus.iter().map(|mu| cos(w, mu)).fold(f64::NEG_INFINITY, f64::max))
                .collect())
        }
    }
}

fn chunks<'a>(data: &'a [LabeledSample], schedule: &TrainSchedule) -> Result<Vec<&'a [LabeledSample]>> {
    let t = schedule.iterations();
    match schedule.split {
        SplitPolicy::Whole => {
            if t > 0 && data.is_empty() {
                return Err(Error::Split("empty dataset".into()));
            }
            Ok(vec![data; t])
        }
        SplitPolicy::Halves => {
            if t == 0 {
                return Ok(Vec::new());
            }
            let m = data.len() / t;
            if m == 0 {
                return Err(Error::Split(format!("{} samples cannot fill {t} chunks", data.len())));
            }
            Ok((0..t).map(|i| &data[i * m..(i + 1) * m]).collect())
        }
    }
}

fn plateaued(losses: &[f64], rule: &PlateauRule) -> bool {
    let n = losses.len();
    if rule.window == 0 || n <= rule.window {
        return false;
    }
    let (old, new) = (losses[n - 1 - rule.window], losses[n - 1]);
    old - new < rule.rel_tol * old.abs()
}

/// Runs the schedule from the given initialization.
pub fn train_from(init: ModelParams, spec: &TaskSpec, schedule: &TrainSchedule, data: &[LabeledSample]) -> Result<TrainResult> {
    if init.shape != spec.shape {
        return Err(Error::Incompatible(format!("model shape {:?} vs task shape {:?}", init.shape, spec.shape)));
    }
    if let Some(s) = data.iter().find(|s| s.x.len() != spec.dim()) {
        return Err(Error::ShapeMismatch { expected: spec.dim(), got: s.x.len() });
    }
    let parts = chunks(data, schedule)?;
    let mut params = init;
    let mut loss_per_iter = Vec::with_capacity(parts.len());
    let mut alignment_per_iter = Vec::with_capacity(parts.len());
    let mut degenerate_events = 0;
    for (t, part) in parts.iter().enumerate() {
        let (loss, grad) = loss_and_grad(&params, part);
        let step = projected_update(&params, schedule.step_sizes[t], schedule.biases[t], &grad)?;
        degenerate_events += step.degenerate_nodes.len();
        params = step.params;
        loss_per_iter.push(loss);
        alignment_per_iter.push(alignment(&params, spec)?);
        if let Some(rule) = &schedule.plateau {
            if plateaued(&loss_per_iter, rule) {
                break;
            }
        }
    }
    Ok(TrainResult {
        params,
        alignment_per_iter,
        loss_per_iter,
        schedule: schedule.clone(),
        seed: schedule.seed,
        degenerate_events,
    })
}

/// Initialization drawn from `schedule.seed`. FCN weights are additionally
/// normalized to the unit sphere.
pub fn initial_params(kind: ModelKind, shape: PatchShape, schedule: &TrainSchedule) -> Result<ModelParams> {
    let mut p = init_params(kind, shape, schedule.init_variance, &mut seeded(schedule.seed))?;
    if kind == ModelKind::Fcn {
        for w in &mut p.weights {
            if let Some(v) = normalized(w) {
                *w = v;
            }
        }
    }
    Ok(p)
}

/// The generic iterative algorithm: initialize from the schedule's seed, then
/// apply `T` projected updates.
pub fn train_generic(kind: ModelKind, spec: &TaskSpec, schedule: &TrainSchedule, data: &Dataset) -> Result<TrainResult> {
    let init = initial_params(kind, spec.shape, schedule)?;
    train_from(init, spec, schedule, &data.samples)
}

pub fn train_two_phase_lcn(spec: &TaskSpec, data: &Dataset, seed: u64) -> Result<TrainResult> {
    if data.len() < 2 {
        return Err(Error::Split(format!("two-phase training needs at least 2 samples, got {}", data.len())));
    }
    train_generic(ModelKind::Lcn, spec, &TrainSchedule::two_phase_lcn(spec.shape, seed), data)
}

pub fn train_two_phase_cnn(spec: &TaskSpec, data: &Dataset, seed: u64) -> Result<TrainResult> {
    if data.len() < 2 {
        return Err(Error::Split(format!("two-phase training needs at least 2 samples, got {}", data.len())));
    }
    train_generic(ModelKind::Cnn, spec, &TrainSchedule::two_phase_cnn(spec.shape, seed), data)
}

/// Recommended sample count for the two-phase LCN trainer:
/// `max(2σ²k(k+d) ln(kd), 80 k ln(kd))`, rounded up to even.
pub fn two_phase_lcn_samples(shape: PatchShape, sigma: f64) -> usize {
    let (k, d) = (shape.k as f64, shape.d as f64);
    let l = (k * d).ln();
    round_even((2.0 * sigma * sigma * k * (k + d) * l).max(80.0 * k * l))
}

/// Recommended sample count for the two-phase CNN trainer:
/// `max(2σ²(k+d) ln(kd), 10)`, rounded up to even.
pub fn two_phase_cnn_samples(shape: PatchShape, sigma: f64) -> usize {
    let (k, d) = (shape.k as f64, shape.d as f64);
    let l = (k * d).ln();
    round_even((2.0 * sigma * sigma * (k + d) * l).max(10.0))
}

fn round_even(x: f64) -> usize {
    let n = x.ceil() as usize;
    n + n % 2
}

/// Initialization variance used by the grid-search trainer.
pub fn grid_init_variance(kind: ModelKind, shape: PatchShape) -> f64 {
    match kind {
        ModelKind::Fcn => 1.0 / shape.dim() as f64,
        ModelKind::Lcn | ModelKind::Cnn => small_init_variance(shape),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub lr: f64,
    pub bias: f64,
    pub test_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchOutcome {
    pub best: TrainResult,
    pub selected_lr: f64,
    pub selected_bias: f64,
    pub test_error: f64,
    pub cells: Vec<GridCell>,
}

/// Schedule used for one grid cell.
pub fn grid_cell_schedule(kind: ModelKind, shape: PatchShape, lr: f64, bias: f64, iterations: usize, seed: u64) -> Result<TrainSchedule> {
    Ok(TrainSchedule::constant(iterations, lr, bias, grid_init_variance(kind, shape), seed)?.with_plateau(PlateauRule::default()))
}

/// Trains one model per `(lr, bias)` cell, scores each on `test_data` and
/// returns the lowest test error. Ties go to the smaller step size, then the
/// smaller bias.
#[allow(clippy::too_many_arguments)]
pub fn grid_search_train(
    kind: ModelKind,
    spec: &TaskSpec,
    data: &Dataset,
    test_data: &Dataset,
    weight_lrs: &[f64],
    bias_grid: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<GridSearchOutcome> {
    if weight_lrs.is_empty() || bias_grid.is_empty() {
        return Err(Error::InvalidParameter("grid search needs non-empty grids".into()));
    }
    if test_data.is_empty() {
        return Err(Error::InvalidParameter("grid search needs a non-empty test set".into()));
    }
    let mut grid: Vec<(f64, f64)> = weight_lrs.iter().flat_map(|&lr| bias_grid.iter().map(move |&b| (lr, b))).collect();
    grid.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let trained = grid
        .par_iter()
        .map(|&(lr, bias)| {
            let schedule = grid_cell_schedule(kind, spec.shape, lr, bias, iterations, seed)?;
            let result = train_generic(kind, spec, &schedule, data)?;
            let err = empirical_loss(&result.params, &test_data.samples)?;
            Ok((GridCell { lr, bias, test_error: err }, result))
        })
        .collect::<Result<Vec<_>>>()?;
    // Cells are sorted by (lr, bias); strict `<` keeps the first minimum.
    let mut best_idx = 0;
    for (i, (cell, _)) in trained.iter().enumerate() {
        if cell.test_error < trained[best_idx].0.test_error {
            best_idx = i;
        }
    }
    let cells: Vec<GridCell> = trained.iter().map(|(c, _)| *c).collect();
    let (cell, best) = trained.into_iter().nth(best_idx).expect("non-empty grid");
    Ok(GridSearchOutcome { best, selected_lr: cell.lr, selected_bias: cell.bias, test_error: cell.test_error, cells })
}
