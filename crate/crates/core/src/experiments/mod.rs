//! Experiment protocols: test-error sweeps, binary-search sample complexity,
//! reports and plots, and the boosting demonstration.

mod boost;
mod complexity;
pub mod plot;
mod report;
mod sweep;

pub use boost::{run_boosting_demo, run_boosting_demo_with, BoostReport, SectionDiagnostics};
pub use complexity::{
    binary_search_min_n, estimate_sample_complexity, max_probes, default_complexity_shapes, run_complexity_sweep, ComplexityConfig,
    ComplexityResult, ComplexityRow, ComplexitySweep, GridProbe, Probe, ProbeEvaluator, ReplicateComplexity, SearchOutcome,
};
pub use report::{
    aggregate_sweep_rows, emit_complexity_report, emit_sweep_report, read_complexity_csv, read_sweep_csv, Metadata, ARTIFACT_VERSION,
};
pub use sweep::{run_test_error_sweep, SweepCell, SweepConfig, SweepFailure, SweepReport, SweepRow};

use serde::{Deserialize, Serialize};

use crate::datagen::{Dataset, Distribution, Sampler, TaskSpec};
use crate::error::{Error, Result};
use crate::models::ModelParams;
use crate::patchspace::PatchShape;
use crate::stats::Welford;
use crate::training::{GRID_ITERATIONS, DEFAULT_BIAS_GRID, DEFAULT_WEIGHT_LRS};

/// Noise level used when an experiment builds its tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLevel {
    Fixed(f64),
    /// `σ = 1/sqrt(k)`.
    InverseSqrtK,
}

/// Fixed noise used by the shipped experiment defaults.
pub const DEFAULT_SIGMA: f64 = 0.12;

impl Default for NoiseLevel {
    fn default() -> Self {
        NoiseLevel::Fixed(DEFAULT_SIGMA)
    }
}

impl NoiseLevel {
    pub fn sigma(self, shape: PatchShape) -> f64 {
        match self {
            NoiseLevel::Fixed(s) => s,
            NoiseLevel::InverseSqrtK => 1.0 / (shape.k as f64).sqrt(),
        }
    }
}

impl std::str::FromStr for NoiseLevel {
    type Err = Error;

    /// A positive number, or `inv-sqrt-k`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "inv-sqrt-k" {
            return Ok(NoiseLevel::InverseSqrtK);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(NoiseLevel::Fixed(v)),
            _ => Err(Error::InvalidParameter(format!("noise level must be a positive number or inv-sqrt-k, got {s:?}"))),
        }
    }
}

/// Grid-search settings shared by the sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    pub weight_lrs: Vec<f64>,
    pub bias_grid: Vec<f64>,
    pub iterations: usize,
    /// Held-out samples per (task, replicate) used to score grid cells.
    pub test_size: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            weight_lrs: DEFAULT_WEIGHT_LRS.to_vec(),
            bias_grid: DEFAULT_BIAS_GRID.to_vec(),
            iterations: GRID_ITERATIONS,
            test_size: 10_000,
        }
    }
}

impl GridSettings {
    pub fn validate(&self) -> Result<()> {
        if self.weight_lrs.is_empty() || self.bias_grid.is_empty() {
            return Err(Error::InvalidParameter("grid must be non-empty".into()));
        }
        if self.test_size == 0 {
            return Err(Error::InvalidParameter("test size must be positive".into()));
        }
        Ok(())
    }
}

/// Bias values tried by the oracle model.
pub const ORACLE_BIASES: [f64; 4] = [0.0, 1e-4, 1e-3, 1e-2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalLoss {
    pub value: f64,
    pub se: f64,
    pub bias: f64,
    pub n_test: usize,
}

/// Monte Carlo risk of the oracle CNN (`w = w*`) on DSD, minimized over
/// [`ORACLE_BIASES`]. Every bias is scored on the same draws.
pub fn optimal_loss<R: rand::Rng + ?Sized>(spec: &TaskSpec, n_test: usize, rng: &mut R) -> Result<OptimalLoss> {
    if n_test == 0 {
        return Err(Error::InvalidParameter("n_test must be positive".into()));
    }
    let models = ORACLE_BIASES
        .iter()
        .map(|&b| ModelParams::cnn(spec.shape, spec.signal.clone(), b))
        .collect::<Result<Vec<_>>>()?;
    let dist = Distribution::dsd();
    let mut sampler = Sampler::new(spec, &dist)?;
    let mut x = vec![0.0; spec.dim()];
    let mut pre = vec![0.0; spec.shape.k];
    let mut acc = vec![Welford::default(); models.len()];
    for _ in 0..n_test {
        let (y, _) = sampler.draw_into(rng, &mut x);
        for (m, a) in models.iter().zip(acc.iter_mut()) {
            let r = y - m.forward_with(&x, &mut pre);
            a.push(r * r);
        }
    }
    let best = (0..models.len()).min_by(|&a, &b| acc[a].mean().total_cmp(&acc[b].mean())).expect("non-empty");
    Ok(OptimalLoss { value: acc[best].mean(), se: acc[best].se(), bias: ORACLE_BIASES[best], n_test })
}

/// [`optimal_loss`] on a fixed sample set, so that excess errors measured on
/// the same set share its noise.
pub fn optimal_loss_on(spec: &TaskSpec, data: &Dataset) -> Result<OptimalLoss> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("oracle loss needs at least one sample".into()));
    }
    let mut best: Option<OptimalLoss> = None;
    let mut pre = vec![0.0; spec.shape.k];
    for &b in &ORACLE_BIASES {
        let m = ModelParams::cnn(spec.shape, spec.signal.clone(), b)?;
        let mut acc = Welford::default();
        for s in &data.samples {
            let r = s.y - m.forward_with(&s.x, &mut pre);
            acc.push(r * r);
        }
        if best.map_or(true, |o| acc.mean() < o.value) {
            best = Some(OptimalLoss { value: acc.mean(), se: acc.se(), bias: b, n_test: data.len() });
        }
    }
    Ok(best.expect("non-empty bias grid"))
}
