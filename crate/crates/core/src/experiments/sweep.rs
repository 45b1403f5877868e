use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GridSettings, NoiseLevel};
use crate::datagen::{sample_dsd, TaskSpec};
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::patchspace::PatchShape;
use crate::rng::derive_seed;
use crate::stats::mean_std;
use crate::training::grid_search_train;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kinds: Vec<ModelKind>,
    pub k_values: Vec<usize>,
    pub d_values: Vec<usize>,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
    pub sigma: NoiseLevel,
    pub grid: GridSettings,
    pub master_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            kinds: ModelKind::ALL.to_vec(),
            k_values: vec![20],
            d_values: vec![20],
            sample_sizes: vec![10, 50, 100, 250, 500],
            replicates: 5,
            sigma: NoiseLevel::default(),
            grid: GridSettings::default(),
            master_seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty() || self.k_values.is_empty() || self.d_values.is_empty() || self.sample_sizes.is_empty() {
            return Err(Error::InvalidParameter("sweep lists must be non-empty".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be at least 1".into()));
        }
        self.grid.validate()
    }
}

/// One trained model in long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: ModelKind,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub test_error: f64,
    pub selected_lr: f64,
    pub selected_bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub kind: ModelKind,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub replicate: usize,
    pub message: String,
}

/// Mean and standard deviation of the test error over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub kind: ModelKind,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn cell(&self, kind: ModelKind, k: usize, d: usize, n: usize) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.kind == kind && c.k == k && c.d == d && c.n == n)
    }
}

fn task_key(k: usize, d: usize, replicate: usize) -> u64 {
    ((k as u64) << 40) ^ ((d as u64) << 20) ^ replicate as u64
}

/// Task (signal) and held-out set are shared by every kind and sample size of
/// a `(k, d, replicate)`; training data is shared by every kind.
pub(crate) fn replicate_spec(sigma: NoiseLevel, shape: PatchShape, replicate: usize, master_seed: u64) -> Result<TaskSpec> {
    let key = task_key(shape.k, shape.d, replicate);
    TaskSpec::with_random_signal(shape, sigma.sigma(shape), derive_seed(master_seed, "task", key))
}

pub(crate) fn group_cells<K: Ord + Copy>(keyed: impl IntoIterator<Item = (K, f64)>) -> Vec<(K, f64, f64, usize)> {
    let mut map: std::collections::BTreeMap<K, Vec<f64>> = Default::default();
    for (k, v) in keyed {
        map.entry(k).or_default().push(v);
    }
    map.into_iter()
        .map(|(k, vals)| {
            let (m, s) = mean_std(&vals);
            (k, m, s, vals.len())
        })
        .collect()
}

fn kind_index(kind: ModelKind) -> usize {
    ModelKind::ALL.iter().position(|&k| k == kind).expect("known kind")
}

/// Every `(kind, k, d, n, replicate)`: sample training data, grid-search
/// train, record the selected model's held-out error. Failed cells are
/// recorded and skipped.
pub fn run_test_error_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let mut tasks = Vec::new();
    for &kind in &cfg.kinds {
        for &k in &cfg.k_values {
            for &d in &cfg.d_values {
                for &n in &cfg.sample_sizes {
                    for r in 0..cfg.replicates {
                        tasks.push((kind, k, d, n, r));
                    }
                }
            }
        }
    }
    let outcomes: Vec<std::result::Result<SweepRow, SweepFailure>> = tasks
        .par_iter()
        .map(|&(kind, k, d, n, r)| {
            let run = || -> Result<SweepRow> {
                let shape = PatchShape::new(k, d)?;
                let spec = replicate_spec(cfg.sigma, shape, r, cfg.master_seed)?;
                let key = task_key(k, d, r);
                let test = sample_dsd(&spec, cfg.grid.test_size, derive_seed(cfg.master_seed, "test", key))?;
                let seed = derive_seed(cfg.master_seed, "train", key ^ ((n as u64) << 52));
                let train = sample_dsd(&spec, n, seed)?;
                let init_seed = derive_seed(seed, "init", kind_index(kind) as u64);
                let g = grid_search_train(kind, &spec, &train, &test, &cfg.grid.weight_lrs, &cfg.grid.bias_grid, cfg.grid.iterations, init_seed)?;
                Ok(SweepRow {
                    kind,
                    k,
                    d,
                    n,
                    replicate: r,
                    seed,
                    test_error: g.test_error,
                    selected_lr: g.selected_lr,
                    selected_bias: g.selected_bias,
                })
            };
            run().map_err(|e| SweepFailure { kind, k, d, n, replicate: r, message: e.to_string() })
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(f) => failures.push(f),
        }
    }
    let cells = super::aggregate_sweep_rows(&rows);
    Ok(SweepReport { config: cfg.clone(), rows, failures, cells })
}
