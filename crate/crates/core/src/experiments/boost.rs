use serde::{Deserialize, Serialize};

use super::GridSettings;
use crate::datagen::{mu_vector, sample_ssd, Dataset, TaskSpec};
use crate::error::{Error, Result};
use crate::models::{dot, ModelKind, ModelParams};
use crate::rng::derive_seed;
use crate::theory::{boost_mean, identify_aligned_node};
use crate::training::grid_search_train;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionDiagnostics {
    pub section: usize,
    pub identified_node: Option<usize>,
    /// Cosine of the identified node with the mean; `None` when identification failed.
    pub alignment: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostReport {
    pub boosted: Vec<f64>,
    pub boosted_alignment: f64,
    pub max_single_alignment: Option<f64>,
    pub identified_sections: usize,
    pub sections: Vec<SectionDiagnostics>,
}

/// Mean estimation on the static task with the signal in patch 0: each
/// section trains an FCN on `budget` samples, identifies a node with one
/// extra sample, and the identified (normalized) nodes are summed and
/// projected to the sphere.
pub fn run_boosting_demo_with<F>(spec: &TaskSpec, budget: usize, sections: usize, seed: u64, train: F) -> Result<BoostReport>
where
    F: Fn(&TaskSpec, &Dataset, u64) -> Result<ModelParams>,
{
    if sections == 0 || budget == 0 {
        return Err(Error::InvalidParameter("need at least one section and one training sample".into()));
    }
    let mu = mu_vector(spec, 0)?;
    let mut estimates = Vec::with_capacity(sections);
    let mut diagnostics = Vec::with_capacity(sections);
    for s in 0..sections {
        let section_seed = derive_seed(seed, "section", s as u64);
        let mut data = sample_ssd(spec, 0, budget + 1, section_seed)?;
        let held_out = data.samples.pop().expect("budget + 1 samples");
        let params = train(spec, &data, section_seed)?;
        if params.kind != ModelKind::Fcn {
            return Err(Error::Incompatible(format!("boosting needs FCN sections, got {}", params.kind)));
        }
        let node = identify_aligned_node(&params, &held_out)?;
        let (estimate, alignment) = match node {
            Some(i) => {
                let w = &params.weights[i];
                let n = dot(w, w).sqrt();
                if n == 0.0 {
                    (vec![0.0; spec.dim()], None)
                } else {
                    let v: Vec<f64> = w.iter().map(|x| x / n).collect();
                    let a = dot(&v, &mu);
                    (v, Some(a))
                }
            }
            None => (vec![0.0; spec.dim()], None),
        };
        estimates.push(estimate);
        diagnostics.push(SectionDiagnostics { section: s, identified_node: node, alignment });
    }
    let boosted = boost_mean(&estimates)?;
    let boosted_alignment = dot(&boosted, &mu);
    let max_single_alignment = diagnostics.iter().filter_map(|d| d.alignment).reduce(f64::max);
    let identified_sections = diagnostics.iter().filter(|d| d.alignment.is_some()).count();
    Ok(BoostReport { boosted, boosted_alignment, max_single_alignment, identified_sections, sections: diagnostics })
}

/// [`run_boosting_demo_with`] using grid-search FCN training, scored on a
/// fresh validation draw of the same size as the section.
pub fn run_boosting_demo(spec: &TaskSpec, budget: usize, sections: usize, grid: &GridSettings, seed: u64) -> Result<BoostReport> {
    run_boosting_demo_with(spec, budget, sections, seed, |spec, data, s| {
        let validation = sample_ssd(spec, 0, budget.max(grid.test_size.min(1000)), derive_seed(s, "validation", 0))?;
        let g = grid_search_train(ModelKind::Fcn, spec, data, &validation, &grid.weight_lrs, &grid.bias_grid, grid.iterations, derive_seed(s, "init", 0))?;
        Ok(g.best.params)
    })
}
