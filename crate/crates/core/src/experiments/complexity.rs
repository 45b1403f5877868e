use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{group_cells, replicate_spec};
use super::{optimal_loss_on, GridSettings, NoiseLevel, OptimalLoss};
use crate::datagen::{sample_dsd, Dataset, TaskSpec};
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::patchspace::PatchShape;
use crate::rng::derive_seed;
use crate::stats::mean_std;
use crate::training::grid_search_train;

/// Scores a training-set size: returns the held-out error of the model
/// trained on `n` samples drawn from stream `seed`.
pub trait ProbeEvaluator: Sync {
    fn evaluate(&self, n: usize, seed: u64) -> Result<f64>;
}

impl<F: Fn(usize, u64) -> Result<f64> + Sync> ProbeEvaluator for F {
    fn evaluate(&self, n: usize, seed: u64) -> Result<f64> {
        self(n, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub n: usize,
    pub seed: u64,
    pub error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub min_n: usize,
    pub saturated: bool,
    /// The returned `n` passed a probe on a fresh stream.
    pub confirmed: bool,
    pub probes: Vec<Probe>,
}

/// `⌈log₂ n_max⌉ + 2`: bisection, one confirmation, one expansion.
pub fn max_probes(n_max: usize) -> usize {
    (usize::BITS - (n_max - 1).leading_zeros()) as usize + 2
}

/// Bisection for the smallest `n ∈ [1, n_max]` whose error is at most
/// `target`, assuming monotonicity. Bisection probes share one data stream;
/// the answer is then re-checked on a fresh stream. If that fails, the search
/// moves once to the next larger passing probe (or `n_max`) and checks it on
/// a second fresh stream. A failing check at `n_max` sets `saturated`.
pub fn binary_search_min_n<E: ProbeEvaluator + ?Sized>(eval: &E, target: f64, n_max: usize, seed: u64) -> Result<SearchOutcome> {
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!("n_max must be at least 2, got {n_max}")));
    }
    let mut probes: Vec<Probe> = Vec::new();
    let probe = |probes: &mut Vec<Probe>, n: usize, seed: u64| -> Result<bool> {
        let error = eval.evaluate(n, seed)?;
        let passed = error <= target;
        probes.push(Probe { n, seed, error, passed });
        Ok(passed)
    };
    let stream = derive_seed(seed, "bisect", 0);
    let (mut lo, mut hi) = (0usize, n_max);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(&mut probes, mid, stream)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if probe(&mut probes, hi, derive_seed(seed, "confirm", 0))? {
        return Ok(SearchOutcome { min_n: hi, saturated: false, confirmed: true, probes });
    }
    if hi == n_max {
        return Ok(SearchOutcome { min_n: n_max, saturated: true, confirmed: false, probes });
    }
    let next = probes.iter().filter(|p| p.passed && p.n > hi).map(|p| p.n).min().unwrap_or(n_max);
    let ok = probe(&mut probes, next, derive_seed(seed, "confirm", 1))?;
    Ok(SearchOutcome { min_n: next, saturated: !ok && next == n_max, confirmed: ok, probes })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityConfig {
    pub kinds: Vec<ModelKind>,
    pub shapes: Vec<(usize, usize)>,
    pub sigma: NoiseLevel,
    pub tolerance: f64,
    pub n_max: usize,
    pub replicates: usize,
    pub grid: GridSettings,
    /// Training samples spent per probe: a probe at `n` averages
    /// `⌈probe_samples / n⌉` independent training sets, clamped to
    /// `1..=max_draws`.
    pub probe_samples: usize,
    pub max_draws: usize,
    pub master_seed: u64,
}

/// `d = 20` with `k ∈ {10, 15, 20, 25, 30}`, then `k = 20` with the same `d`
/// values (the shared `(20, 20)` listed once).
pub fn default_complexity_shapes() -> Vec<(usize, usize)> {
    let grid = [10, 15, 20, 25, 30];
    let mut shapes: Vec<(usize, usize)> = grid.iter().map(|&k| (k, 20)).collect();
    shapes.extend(grid.iter().filter(|&&d| d != 20).map(|&d| (20, d)));
    shapes
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        Self {
            kinds: vec![ModelKind::Lcn, ModelKind::Cnn],
            shapes: default_complexity_shapes(),
            sigma: NoiseLevel::default(),
            tolerance: 0.03,
            n_max: 1000,
            replicates: 5,
            grid: GridSettings::default(),
            probe_samples: 300,
            max_draws: 16,
            master_seed: 0,
        }
    }
}

impl ComplexityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty() || self.shapes.is_empty() || self.replicates == 0 || self.max_draws == 0 {
            return Err(Error::InvalidParameter("complexity config lists must be non-empty".into()));
        }
        if self.n_max < 2 {
            return Err(Error::InvalidParameter("n_max must be at least 2".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        self.grid.validate()
    }
}

/// Grid-search training on `n` DSD samples, scored on a fixed held-out set
/// and averaged over several independent training sets.
pub struct GridProbe<'a> {
    pub kind: ModelKind,
    pub spec: &'a TaskSpec,
    pub test: &'a Dataset,
    pub grid: &'a GridSettings,
    pub probe_samples: usize,
    pub max_draws: usize,
    pub init_seed: u64,
}

impl GridProbe<'_> {
    pub fn draws(&self, n: usize) -> usize {
        self.probe_samples.div_ceil(n.max(1)).clamp(1, self.max_draws.max(1))
    }
}

impl ProbeEvaluator for GridProbe<'_> {
    fn evaluate(&self, n: usize, seed: u64) -> Result<f64> {
        let draws = self.draws(n);
        let mut total = 0.0;
        for j in 0..draws as u64 {
            // Streams are prefix-consistent: n samples from a seed are the
            // first n of any larger draw from the same seed.
            let stream = if j == 0 { seed } else { derive_seed(seed, "draw", j) };
            let train = sample_dsd(self.spec, n, stream)?;
            let g = grid_search_train(
                self.kind,
                self.spec,
                &train,
                self.test,
                &self.grid.weight_lrs,
                &self.grid.bias_grid,
                self.grid.iterations,
                derive_seed(self.init_seed, "draw", j),
            )?;
            total += g.test_error;
        }
        Ok(total / draws as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateComplexity {
    pub replicate: usize,
    pub seed: u64,
    pub optimal: OptimalLoss,
    pub target_loss: f64,
    pub search: SearchOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityResult {
    pub kind: ModelKind,
    pub k: usize,
    pub d: usize,
    pub sigma: f64,
    pub tolerance: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub replicates: Vec<ReplicateComplexity>,
    pub mean: f64,
    pub std: f64,
    /// Mean over replicates of `optimal loss + tolerance`.
    pub target_loss: f64,
}

impl ComplexityResult {
    pub fn min_ns(&self) -> Vec<usize> {
        self.replicates.iter().map(|r| r.search.min_n).collect()
    }
}

/// Sample complexity of `kind` on tasks of the given shape: per replicate,
/// the oracle loss fixes the target and bisection finds the minimal `n`.
pub fn estimate_sample_complexity(kind: ModelKind, shape: PatchShape, cfg: &ComplexityConfig) -> Result<ComplexityResult> {
    cfg.validate()?;
    let reps = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let spec = replicate_spec(cfg.sigma, shape, r, cfg.master_seed)?;
            let key = derive_seed(spec.master_seed, "replicate", r as u64);
            let test = sample_dsd(&spec, cfg.grid.test_size, derive_seed(key, "test", 0))?;
            // Scored on the probes' own held-out set: the excess error then
            // carries no test-set noise.
            let optimal = optimal_loss_on(&spec, &test)?;
            let target_loss = optimal.value + cfg.tolerance;
            let probe = GridProbe { kind, spec: &spec, test: &test, grid: &cfg.grid, probe_samples: cfg.probe_samples, max_draws: cfg.max_draws, init_seed: derive_seed(key, "init", 0) };
            let seed = derive_seed(key, "search", kind as u64);
            let search = binary_search_min_n(&probe, target_loss, cfg.n_max, seed)?;
            Ok(ReplicateComplexity { replicate: r, seed, optimal, target_loss, search })
        })
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<f64> = reps.iter().map(|r| r.search.min_n as f64).collect();
    let (mean, std) = mean_std(&ns);
    let target_loss = reps.iter().map(|r| r.target_loss).sum::<f64>() / reps.len() as f64;
    Ok(ComplexityResult {
        kind,
        k: shape.k,
        d: shape.d,
        sigma: cfg.sigma.sigma(shape),
        tolerance: cfg.tolerance,
        n_min: 1,
        n_max: cfg.n_max,
        replicates: reps,
        mean,
        std,
        target_loss,
    })
}

/// One CSV row of a complexity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub kind: ModelKind,
    pub k: usize,
    pub d: usize,
    pub replicate: usize,
    pub seed: u64,
    pub min_n: usize,
    pub target_loss: f64,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexitySweep {
    pub config: ComplexityConfig,
    pub results: Vec<ComplexityResult>,
}

impl ComplexitySweep {
    pub fn rows(&self) -> Vec<ComplexityRow> {
        self.results
            .iter()
            .flat_map(|res| {
                res.replicates.iter().map(move |r| ComplexityRow {
                    kind: res.kind,
                    k: res.k,
                    d: res.d,
                    replicate: r.replicate,
                    seed: r.seed,
                    min_n: r.search.min_n,
                    target_loss: r.target_loss,
                    saturated: r.search.saturated,
                })
            })
            .collect()
    }

    pub fn result(&self, kind: ModelKind, k: usize, d: usize) -> Option<&ComplexityResult> {
        self.results.iter().find(|r| r.kind == kind && r.k == k && r.d == d)
    }

    /// `(kind, k, d) → (mean, std, count)` recomputed from the rows.
    pub fn aggregates(rows: &[ComplexityRow]) -> Vec<((ModelKind, usize, usize), f64, f64, usize)> {
        group_cells(rows.iter().map(|r| ((r.kind, r.k, r.d), r.min_n as f64)))
    }
}

/// Every `(kind, shape)` in the config. Results are ordered as the config lists them.
pub fn run_complexity_sweep(cfg: &ComplexityConfig) -> Result<ComplexitySweep> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &kind in &cfg.kinds {
        for &(k, d) in &cfg.shapes {
            jobs.push((kind, PatchShape::new(k, d)?));
        }
    }
    let results = jobs
        .par_iter()
        .map(|&(kind, shape)| estimate_sample_complexity(kind, shape, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexitySweep { config: cfg.clone(), results })
}
