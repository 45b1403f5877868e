//! Numerical checks that a (model, trainer, group) triple is equivariant.
//!
//! A transform `U` of the input space is lifted to an orthogonal map `V` on
//! parameters. The checks are
//!
//! * model: `M[w](x) = M[Vw](Ux)` for every test input,
//! * update: `V F(w, S) = F(Vw, U S)` for one (or several) training steps,
//! * init: `Vw` and `w` have the same law under the initializer,
//! * risk: training on `U∘DSD` and testing on `U∘DSD` gives the same risk law
//!   as training and testing on DSD.
//!
//! The first two are identities and are checked to a fixed tolerance; the
//! last two are distributional and use two-sample KS tests.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{sample_dsd, LabeledSample, TaskSpec};
use crate::error::{Error, Result};
use crate::models::{empirical_loss, forward, loss_and_grad, ModelKind, ModelParams};
use crate::patchspace::{haar_orthogonal, Matrix, PatchShape, PatchTransform};
use crate::rng::{derive_seed, seeded, LabRng};
use crate::stats::{ks_two_sample, KsOutcome};
use crate::training::{initial_params, projected_update, train_from, TrainSchedule};

pub const MODEL_TOLERANCE: f64 = 1e-9;
pub const UPDATE_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_LEVEL: f64 = 0.01;

/// An orthogonal map of the input space.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Patch(PatchTransform),
    /// Arbitrary `kd × kd` orthogonal matrix (the FCN group).
    Dense(Matrix),
}

impl From<PatchTransform> for GroupElement {
    fn from(t: PatchTransform) -> Self {
        GroupElement::Patch(t)
    }
}

impl GroupElement {
    pub fn dim(&self) -> usize {
        match self {
            GroupElement::Patch(t) => t.shape().dim(),
            GroupElement::Dense(m) => m.dim(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            GroupElement::Patch(t) => t.apply(x),
            GroupElement::Dense(m) => {
                if x.len() != m.dim() {
                    return Err(Error::ShapeMismatch { expected: m.dim(), got: x.len() });
                }
                Ok(m.mul_vec(x))
            }
        }
    }

    /// The transform as a dense `kd × kd` matrix.
    pub fn to_dense(&self) -> Matrix {
        match self {
            GroupElement::Dense(m) => m.clone(),
            GroupElement::Patch(t) => {
                let n = t.shape().dim();
                let mut data = vec![0.0; n * n];
                let mut e = vec![0.0; n];
                for c in 0..n {
                    e[c] = 1.0;
                    let col = t.apply(&e).expect("length matches");
                    e[c] = 0.0;
                    for r in 0..n {
                        data[r * n + c] = col[r];
                    }
                }
                Matrix::from_row_major(n, data).expect("square")
            }
        }
    }

    /// `self ∘ other`. Two patch transforms compose structurally; anything
    /// else goes through dense matrices.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.dim() != other.dim() {
            return Err(Error::Incompatible(format!("cannot compose dims {} and {}", self.dim(), other.dim())));
        }
        match (self, other) {
            (GroupElement::Patch(a), GroupElement::Patch(b)) => Ok(GroupElement::Patch(a.compose(b)?)),
            _ => Ok(GroupElement::Dense(self.to_dense().mul_mat(&other.to_dense()))),
        }
    }

    pub fn transform_samples(&self, data: &[LabeledSample]) -> Result<Vec<LabeledSample>> {
        data.iter()
            .map(|s| Ok(LabeledSample { x: self.apply(&s.x)?, y: s.y, latent_patch: s.latent_patch }))
            .collect()
    }
}

/// Haar-distributed dense element of `O(kd)`.
pub fn random_dense<R: rand::Rng + ?Sized>(shape: PatchShape, rng: &mut R) -> Result<GroupElement> {
    Ok(GroupElement::Dense(haar_orthogonal(shape.dim(), rng)?))
}

/// How an input transform acts on parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftRule {
    /// `w_i ← U w_i` for full-input weights.
    Full,
    /// `w_i ← B_i w_{π(i)}` for per-patch weights.
    PatchLocal,
    /// Every `d`-chunk of every weight rotated by the tied block; no permutation.
    Shared,
}

impl LiftRule {
    pub fn for_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Fcn => LiftRule::Full,
            ModelKind::Lcn => LiftRule::PatchLocal,
            ModelKind::Cnn => LiftRule::Shared,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            LiftRule::Full => "w_i <- U w_i",
            LiftRule::PatchLocal => "w_i <- B_i w_perm(i)",
            LiftRule::Shared => "w <- B w (tied block, permutation ignored)",
        }
    }
}

/// Lift with the rule native to `params.kind`.
pub fn lift(g: &GroupElement, params: &ModelParams) -> Result<ModelParams> {
    lift_with(LiftRule::for_kind(params.kind), g, params)
}

pub fn lift_with(rule: LiftRule, g: &GroupElement, params: &ModelParams) -> Result<ModelParams> {
    if g.dim() != params.shape.dim() {
        return Err(Error::Incompatible(format!("transform dim {} vs model dim {}", g.dim(), params.shape.dim())));
    }
    let d = params.shape.d;
    let weights = match rule {
        LiftRule::Full => {
            if params.kind != ModelKind::Fcn {
                return Err(Error::Incompatible(format!("full lift needs full-input weights, got {}", params.kind)));
            }
            params.weights.iter().map(|w| g.apply(w)).collect::<Result<Vec<_>>>()?
        }
        LiftRule::PatchLocal => {
            let GroupElement::Patch(t) = g else {
                return Err(Error::Incompatible("patch-local lift needs a patch transform".into()));
            };
            if params.kind != ModelKind::Lcn {
                return Err(Error::Incompatible(format!("patch-local lift needs per-patch weights, got {}", params.kind)));
            }
            t.blocks().iter().zip(t.perm()).map(|(b, &p)| b.mul_vec(&params.weights[p])).collect()
        }
        LiftRule::Shared => {
            let GroupElement::Patch(t) = g else {
                return Err(Error::Incompatible("shared lift needs a patch transform".into()));
            };
            if !t.is_tied() {
                return Err(Error::Incompatible("shared lift needs tied blocks".into()));
            }
            let q = &t.blocks()[0];
            params
                .weights
                .iter()
                .map(|w| {
                    let mut out = vec![0.0; w.len()];
                    for (src, dst) in w.chunks(d).zip(out.chunks_mut(d)) {
                        q.mul_vec_into(src, dst);
                    }
                    out
                })
                .collect()
        }
    };
    Ok(ModelParams { kind: params.kind, shape: params.shape, weights, bias: params.bias })
}

/// Outcome of a deterministic identity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub cases: usize,
}

impl IdentityReport {
    fn from_residuals(residuals: impl IntoIterator<Item = f64>, tolerance: f64) -> Self {
        let mut max_residual = 0.0f64;
        let mut cases = 0;
        let mut finite = true;
        for r in residuals {
            finite &= r.is_finite();
            max_residual = max_residual.max(r);
            cases += 1;
        }
        IdentityReport { passed: finite && max_residual <= tolerance, max_residual, tolerance, cases }
    }

    /// Joins reports; the result passes only if every part does.
    pub fn merge(self, other: IdentityReport) -> IdentityReport {
        IdentityReport {
            passed: self.passed && other.passed,
            max_residual: self.max_residual.max(other.max_residual),
            tolerance: self.tolerance.max(other.tolerance),
            cases: self.cases + other.cases,
        }
    }
}

pub fn check_model_equivariance(params: &ModelParams, g: &GroupElement, test_vectors: &[Vec<f64>]) -> Result<IdentityReport> {
    check_model_equivariance_with(LiftRule::for_kind(params.kind), params, g, test_vectors)
}

/// `|M[w](x) − M[Vw](Ux)|` over the test vectors, with `V` given by `rule`.
pub fn check_model_equivariance_with(
    rule: LiftRule,
    params: &ModelParams,
    g: &GroupElement,
    test_vectors: &[Vec<f64>],
) -> Result<IdentityReport> {
    let lifted = lift_with(rule, g, params)?;
    let residuals = test_vectors
        .iter()
        .map(|x| Ok((forward(params, x)? - forward(&lifted, &g.apply(x)?)?).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(IdentityReport::from_residuals(residuals, MODEL_TOLERANCE))
}

fn param_distance(a: &ModelParams, b: &ModelParams) -> f64 {
    let w = a
        .weights
        .iter()
        .zip(&b.weights)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0f64, f64::max);
    w.max((a.bias - b.bias).abs())
}

/// `V F(w, S)` against `F(Vw, U S)` for an arbitrary update map `F`.
pub fn check_update_equivariance<F>(params: &ModelParams, g: &GroupElement, data: &[LabeledSample], update: F) -> Result<IdentityReport>
where
    F: Fn(&ModelParams, &[LabeledSample]) -> Result<ModelParams>,
{
    let lhs = lift(g, &update(params, data)?)?;
    let rhs = update(&lift(g, params)?, &g.transform_samples(data)?)?;
    Ok(IdentityReport::from_residuals([param_distance(&lhs, &rhs)], UPDATE_TOLERANCE))
}

/// Update map for step `t` of a schedule: one projected gradient step on the
/// whole of the given data.
pub fn schedule_step(schedule: &TrainSchedule, t: usize) -> impl Fn(&ModelParams, &[LabeledSample]) -> Result<ModelParams> + '_ {
    move |p, data| {
        if t >= schedule.iterations() {
            return Err(Error::IndexOutOfRange { index: t, len: schedule.iterations() });
        }
        let (_, grad) = loss_and_grad(p, data);
        Ok(projected_update(p, schedule.step_sizes[t], schedule.biases[t], &grad)?.params)
    }
}

/// Update map that runs a full schedule (all iterations, with its split policy).
pub fn schedule_run<'a>(spec: &'a TaskSpec, schedule: &'a TrainSchedule) -> impl Fn(&ModelParams, &[LabeledSample]) -> Result<ModelParams> + 'a {
    move |p, data| Ok(train_from(p.clone(), spec, schedule, data)?.params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitInvarianceReport {
    pub passed: bool,
    pub level: f64,
    /// Per-projection level after Bonferroni correction.
    pub corrected_level: f64,
    pub n_draws: usize,
    pub per_projection: Vec<KsOutcome>,
}

fn flatten(p: &ModelParams) -> Vec<f64> {
    p.weights.iter().flatten().copied().collect()
}

/// Fixed projections: the first and last coordinate plus two Gaussian
/// directions drawn from `seed`.
fn projections(len: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution as _, StandardNormal};
    let mut out = Vec::new();
    let mut e = vec![0.0; len];
    e[0] = 1.0;
    out.push(e.clone());
    if len > 1 {
        e[0] = 0.0;
        e[len - 1] = 1.0;
        out.push(e);
    }
    let mut rng = seeded(derive_seed(seed, "projection", 0));
    for _ in 0..2 {
        out.push((0..len).map(|_| StandardNormal.sample(&mut rng)).collect());
    }
    out
}

/// Two-sample KS between `n_draws` raw initializations and `n_draws` lifted
/// (independent) initializations, on fixed linear projections.
pub fn check_init_invariance_with<F>(mut sampler: F, g: &GroupElement, n_draws: usize, level: f64, seed: u64) -> Result<InitInvarianceReport>
where
    F: FnMut(&mut LabRng) -> Result<ModelParams>,
{
    if n_draws == 0 || !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter("need n_draws ≥ 1 and level in (0, 1)".into()));
    }
    let mut raw_rng = seeded(derive_seed(seed, "init-raw", 0));
    let mut lift_rng = seeded(derive_seed(seed, "init-lifted", 0));
    let mut raw = Vec::with_capacity(n_draws);
    let mut lifted = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        raw.push(flatten(&sampler(&mut raw_rng)?));
        lifted.push(flatten(&lift(g, &sampler(&mut lift_rng)?)?));
    }
    let dirs = projections(raw[0].len(), seed);
    let project = |rows: &[Vec<f64>], v: &[f64]| -> Vec<f64> {
        rows.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    };
    let per_projection: Vec<KsOutcome> =
        dirs.iter().map(|v| ks_two_sample(&project(&raw, v), &project(&lifted, v))).collect();
    let corrected_level = level / dirs.len() as f64;
    let passed = per_projection.iter().all(|o| o.p_value >= corrected_level);
    Ok(InitInvarianceReport { passed, level, corrected_level, n_draws, per_projection })
}

/// Init check for the Gaussian initializer with per-coordinate variance `γ`.
pub fn check_init_invariance(kind: ModelKind, shape: PatchShape, gamma: f64, g: &GroupElement, n_draws: usize, level: f64, seed: u64) -> Result<InitInvarianceReport> {
    check_init_invariance_with(|rng| crate::training::init_params(kind, shape, gamma, rng), g, n_draws, level, seed)
}

/// A training algorithm: an initializer plus a fit map from an initialization.
pub trait Trainer: Sync {
    fn kind(&self) -> ModelKind;
    fn init(&self, shape: PatchShape, seed: u64) -> Result<ModelParams>;
    fn fit(&self, init: ModelParams, spec: &TaskSpec, data: &[LabeledSample]) -> Result<ModelParams>;
}

/// The two-phase LCN or CNN trainer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoPhase(pub ModelKind);

impl TwoPhase {
    fn schedule(&self, shape: PatchShape, seed: u64) -> Result<TrainSchedule> {
        match self.0 {
            ModelKind::Lcn => Ok(TrainSchedule::two_phase_lcn(shape, seed)),
            ModelKind::Cnn => Ok(TrainSchedule::two_phase_cnn(shape, seed)),
            ModelKind::Fcn => Err(Error::Incompatible("no two-phase trainer for FCN".into())),
        }
    }
}

impl Trainer for TwoPhase {
    fn kind(&self) -> ModelKind {
        self.0
    }

    fn init(&self, shape: PatchShape, seed: u64) -> Result<ModelParams> {
        initial_params(self.0, shape, &self.schedule(shape, seed)?)
    }

    fn fit(&self, init: ModelParams, spec: &TaskSpec, data: &[LabeledSample]) -> Result<ModelParams> {
        let schedule = self.schedule(spec.shape, 0)?;
        Ok(train_from(init, spec, &schedule, data)?.params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskInvarianceReport {
    pub passed: bool,
    pub ks: KsOutcome,
    pub level: f64,
    pub ks_passed: bool,
    /// Largest |risk_base − risk_transformed| over coupled replicates.
    pub max_paired_difference: f64,
    pub paired_tolerance: f64,
    pub paired_passed: bool,
    pub risks_base: Vec<f64>,
    pub risks_transformed: Vec<f64>,
    pub coupling: String,
}

const COUPLING: &str = "per replicate: one DSD training draw and one DSD test draw shared by both arms (the transformed arm sees their images); transformed-arm init is the lift of the base-arm init";

/// Risk of (train on DSD, test on DSD) against (train on U∘DSD, test on U∘DSD)
/// across `replicates` seeded replicates. Passes when the KS test does not
/// reject at `level` and the coupled risks agree to 1e-8 (relative).
#[allow(clippy::too_many_arguments)]
pub fn check_risk_invariance<T: Trainer + ?Sized>(
    trainer: &T,
    spec: &TaskSpec,
    g: &GroupElement,
    replicates: usize,
    n: usize,
    n_test: usize,
    level: f64,
    seed: u64,
) -> Result<RiskInvarianceReport> {
    if replicates == 0 || n == 0 || n_test == 0 {
        return Err(Error::InvalidParameter("replicates, n and n_test must be positive".into()));
    }
    let pairs = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let train = sample_dsd(spec, n, derive_seed(seed, "risk-train", r))?;
            let test = sample_dsd(spec, n_test, derive_seed(seed, "risk-test", r))?;
            let init = trainer.init(spec.shape, derive_seed(seed, "risk-init", r))?;
            let base = trainer.fit(init.clone(), spec, &train.samples)?;
            let moved = trainer.fit(lift(g, &init)?, spec, &g.transform_samples(&train.samples)?)?;
            let rb = empirical_loss(&base, &test.samples)?;
            let rt = empirical_loss(&moved, &g.transform_samples(&test.samples)?)?;
            Ok((rb, rt))
        })
        .collect::<Result<Vec<_>>>()?;
    let (risks_base, risks_transformed): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let ks = ks_two_sample(&risks_base, &risks_transformed);
    let max_paired_difference = risks_base
        .iter()
        .zip(&risks_transformed)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1.0))
        .fold(0.0f64, f64::max);
    let paired_tolerance = UPDATE_TOLERANCE;
    let ks_passed = ks.p_value >= level;
    let paired_passed = max_paired_difference <= paired_tolerance;
    Ok(RiskInvarianceReport {
        passed: ks_passed && paired_passed,
        ks,
        level,
        ks_passed,
        max_paired_difference,
        paired_tolerance,
        paired_passed,
        risks_base,
        risks_transformed,
        coupling: COUPLING.to_string(),
    })
}

/// Constructed counterexamples that the checks must reject.
pub mod controls {
    use super::*;

    /// Wraps an update and then adds `0.1` to the first coordinate of the
    /// first weight vector.
    pub fn shifted_update<F>(inner: F) -> impl Fn(&ModelParams, &[LabeledSample]) -> Result<ModelParams>
    where
        F: Fn(&ModelParams, &[LabeledSample]) -> Result<ModelParams>,
    {
        move |p, data| {
            let mut out = inner(p, data)?;
            out.weights[0][0] += 0.1;
            Ok(out)
        }
    }

    /// Independent Gaussian init whose flattened coordinate `j` has variance `j + 1`.
    pub fn anisotropic_init(kind: ModelKind, shape: PatchShape) -> impl FnMut(&mut LabRng) -> Result<ModelParams> {
        use rand_distr::{Distribution as _, StandardNormal};
        move |rng| {
            let dim = kind.weight_dim(shape);
            let weights = (0..kind.weight_count(shape))
                .map(|i| {
                    (0..dim)
                        .map(|c| {
                            let e: f64 = StandardNormal.sample(rng);
                            e * ((i * dim + c + 1) as f64).sqrt()
                        })
                        .collect()
                })
                .collect();
            ModelParams::new(kind, shape, weights, 0.0)
        }
    }

    /// Wraps a trainer and returns the initialization untouched whenever the
    /// first coordinate of the first training input is positive.
    pub struct SkipWhenPositive<T>(pub T);

    impl<T: Trainer> Trainer for SkipWhenPositive<T> {
        fn kind(&self) -> ModelKind {
            self.0.kind()
        }

        fn init(&self, shape: PatchShape, seed: u64) -> Result<ModelParams> {
            self.0.init(shape, seed)
        }

        fn fit(&self, init: ModelParams, spec: &TaskSpec, data: &[LabeledSample]) -> Result<ModelParams> {
            match data.first() {
                Some(s) if s.x[0] > 0.0 => Ok(init),
                _ => self.0.fit(init, spec, data),
            }
        }
    }
}
