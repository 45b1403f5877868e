//! Samplers and density for the dynamic / static signal distributions.
//!
//! DSD: draw a patch index `i ~ Unif{0..k}`, a label `y ~ Unif{-1,+1}` and
//! return `x ~ N(y·μ_i, σ² I_{kd})`, where `μ_i` holds the unit signal `w*` in
//! patch `i` and zeros elsewhere. `SSD_t` fixes `i = t`. A transformed
//! distribution `T ∘ P` samples from `P` and returns `(T x, y)`.
//!
//! Patch indices are zero-based throughout the crate.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patchspace::{PatchShape, PatchTransform};
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub shape: PatchShape,
    pub sigma: f64,
    pub signal: Vec<f64>,
    pub master_seed: u64,
}

impl TaskSpec {
    pub fn new(shape: PatchShape, sigma: f64, signal: Vec<f64>, master_seed: u64) -> Result<Self> {
        PatchShape::new(shape.k, shape.d)?;
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        if signal.len() != shape.d {
            return Err(Error::ShapeMismatch { expected: shape.d, got: signal.len() });
        }
        let norm = signal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("signal must be a unit vector, norm = {norm}")));
        }
        Ok(Self { shape, sigma, signal, master_seed })
    }

    /// Signal drawn uniformly on the unit sphere from `master_seed`.
    pub fn with_random_signal(shape: PatchShape, sigma: f64, master_seed: u64) -> Result<Self> {
        PatchShape::new(shape.k, shape.d)?;
        let mut rng = seeded(derive_seed(master_seed, "signal", 0));
        let signal = loop {
            let g: Vec<f64> = (0..shape.d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1e-8 {
                break g.iter().map(|v| v / n).collect();
            }
        };
        Self::new(shape, sigma, signal, master_seed)
    }

    /// Signal `e_1`.
    pub fn with_first_axis_signal(shape: PatchShape, sigma: f64, master_seed: u64) -> Result<Self> {
        let mut signal = vec![0.0; shape.d];
        if let Some(s) = signal.first_mut() {
            *s = 1.0;
        }
        Self::new(shape, sigma, signal, master_seed)
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    /// Noise level assumed by the two-phase trainer analyses:
    /// `1 / (100 · sqrt(k · ln(kd)^3))`.
    pub fn two_phase_sigma(shape: PatchShape) -> f64 {
        let l = (shape.dim() as f64).ln();
        1.0 / (100.0 * (shape.k as f64 * l * l * l).sqrt())
    }
}

/// `μ_i ∈ R^{kd}`: the signal in patch `i`, zeros elsewhere.
pub fn mu_vector(spec: &TaskSpec, i: usize) -> Result<Vec<f64>> {
    if i >= spec.shape.k {
        return Err(Error::IndexOutOfRange { index: i, len: spec.shape.k });
    }
    let d = spec.shape.d;
    let mut mu = vec![0.0; spec.dim()];
    mu[i * d..(i + 1) * d].copy_from_slice(&spec.signal);
    Ok(mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    Dsd,
    /// Static signal distribution with the signal fixed in the given patch.
    Ssd(usize),
}

/// A base distribution, optionally pushed through a patch transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub base: Base,
    pub transform: Option<PatchTransform>,
}

impl Distribution {
    pub fn dsd() -> Self {
        Self { base: Base::Dsd, transform: None }
    }

    pub fn ssd(t: usize) -> Self {
        Self { base: Base::Ssd(t), transform: None }
    }

    pub fn transformed(base: Base, transform: PatchTransform) -> Self {
        Self { base, transform: Some(transform) }
    }
}

/// Fills caller-provided buffers with draws from a [`Distribution`].
pub struct Sampler<'a> {
    spec: &'a TaskSpec,
    dist: &'a Distribution,
    scratch: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(spec: &'a TaskSpec, dist: &'a Distribution) -> Result<Self> {
        if let Base::Ssd(t) = dist.base {
            if t >= spec.shape.k {
                return Err(Error::IndexOutOfRange { index: t, len: spec.shape.k });
            }
        }
        if let Some(tr) = &dist.transform {
            if tr.shape() != spec.shape {
                return Err(Error::Incompatible(format!(
                    "transform shape {:?} differs from task shape {:?}",
                    tr.shape(),
                    spec.shape
                )));
            }
        }
        Ok(Self { spec, dist, scratch: vec![0.0; spec.dim()] })
    }

    /// Writes one draw into `x` and returns `(y, latent_patch)`.
    pub fn draw_into<R: Rng + ?Sized>(&mut self, rng: &mut R, x: &mut [f64]) -> (f64, usize) {
        let shape = self.spec.shape;
        let latent = match self.dist.base {
            Base::Dsd => rng.random_range(0..shape.k),
            Base::Ssd(t) => t,
        };
        let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let sigma = self.spec.sigma;
        let target: &mut [f64] = if self.dist.transform.is_some() { &mut self.scratch } else { x };
        for v in target.iter_mut() {
            let e: f64 = StandardNormal.sample(rng);
            *v = sigma * e;
        }
        let d = shape.d;
        for (v, w) in target[latent * d..(latent + 1) * d].iter_mut().zip(&self.spec.signal) {
            *v += y * w;
        }
        if let Some(tr) = &self.dist.transform {
            tr.apply_into(&self.scratch, x).expect("shape checked at construction");
        }
        (y, latent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: Vec<f64>,
    pub y: f64,
    pub latent_patch: Option<usize>,
}

impl LabeledSample {
    pub fn new(x: Vec<f64>, y: f64, latent_patch: Option<usize>) -> Result<Self> {
        if y != 1.0 && y != -1.0 {
            return Err(Error::InvalidParameter(format!("label must be ±1, got {y}")));
        }
        Ok(Self { x, y, latent_patch })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec: TaskSpec,
    pub base: Base,
    pub seed: Option<u64>,
    pub transform_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn spec(&self) -> &TaskSpec {
        &self.provenance.spec
    }

    /// `T ∘ S`: every input pushed through `transform`, labels and latents kept.
    pub fn transformed(&self, transform: &PatchTransform) -> Result<Dataset> {
        let samples = self
            .samples
            .iter()
            .map(|s| Ok(LabeledSample { x: transform.apply(&s.x)?, y: s.y, latent_patch: s.latent_patch }))
            .collect::<Result<Vec<_>>>()?;
        let mut provenance = self.provenance.clone();
        provenance.transform_id = Some(match &provenance.transform_id {
            Some(prev) => format!("{}*{}", transform.id(), prev),
            None => transform.id(),
        });
        Ok(Dataset { samples, provenance })
    }

    /// CSV with columns `y,latent_patch,x_1..x_{kd}`; empty latent cells mean unknown.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let dim = self.spec().dim();
        let mut header = vec!["y".to_string(), "latent_patch".to_string()];
        header.extend((1..=dim).map(|i| format!("x_{i}")));
        w.write_record(&header)?;
        for s in &self.samples {
            let mut rec = vec![format!("{}", s.y as i64), s.latent_patch.map(|l| l.to_string()).unwrap_or_default()];
            rec.extend(s.x.iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON sidecar carrying the provenance.
    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.provenance)?)?;
        Ok(())
    }

    pub fn read(csv_path: &Path, sidecar_path: &Path) -> Result<Dataset> {
        let provenance: Provenance = serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
        let dim = provenance.spec.dim();
        let mut r = csv::Reader::from_path(csv_path)?;
        let mut samples = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != dim + 2 {
                return Err(Error::ShapeMismatch { expected: dim + 2, got: rec.len() });
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::InvalidParameter(format!("bad float {s:?}: {e}")));
            let y = parse(&rec[0])?;
            let latent = match rec[1].trim() {
                "" => None,
                s => Some(s.parse::<usize>().map_err(|e| Error::InvalidParameter(format!("bad latent {s:?}: {e}")))?),
            };
            let x = (2..rec.len()).map(|i| parse(&rec[i])).collect::<Result<Vec<_>>>()?;
            samples.push(LabeledSample::new(x, y, latent)?);
        }
        Ok(Dataset { samples, provenance })
    }
}

/// `n` i.i.d. draws from `dist`, deterministic in `seed`.
pub fn sample(spec: &TaskSpec, dist: &Distribution, n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = seeded(seed);
    let mut sampler = Sampler::new(spec, dist)?;
    let samples = (0..n)
        .map(|_| {
            let mut x = vec![0.0; spec.dim()];
            let (y, latent) = sampler.draw_into(&mut rng, &mut x);
            LabeledSample { x, y, latent_patch: Some(latent) }
        })
        .collect();
    Ok(Dataset {
        samples,
        provenance: Provenance {
            spec: spec.clone(),
            base: dist.base,
            seed: Some(seed),
            transform_id: dist.transform.as_ref().map(PatchTransform::id),
        },
    })
}

pub fn sample_dsd(spec: &TaskSpec, n: usize, seed: u64) -> Result<Dataset> {
    sample(spec, &Distribution::dsd(), n, seed)
}

pub fn sample_ssd(spec: &TaskSpec, t: usize, n: usize, seed: u64) -> Result<Dataset> {
    sample(spec, &Distribution::ssd(t), n, seed)
}

pub fn sample_transformed(spec: &TaskSpec, base: Base, transform: &PatchTransform, n: usize, seed: u64) -> Result<Dataset> {
    sample(spec, &Distribution::transformed(base, transform.clone()), n, seed)
}

/// `ln p(x, y)` under DSD, evaluated with log-sum-exp over the `k` components.
pub fn dsd_log_pdf(spec: &TaskSpec, x: &[f64], y: f64) -> Result<f64> {
    spec.shape.check_len(x)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if y != 1.0 && y != -1.0 {
        return Err(Error::InvalidParameter(format!("label must be ±1, got {y}")));
    }
    let shape = spec.shape;
    let s2 = spec.sigma * spec.sigma;
    let xx: f64 = x.iter().map(|v| v * v).sum();
    // ‖x − yμ_i‖² = ‖x‖² − 2y⟨x^(i), w*⟩ + 1
    let exps: Vec<f64> = (0..shape.k)
        .map(|i| {
            let dot: f64 = shape.patch(x, i).iter().zip(&spec.signal).map(|(a, b)| a * b).sum();
            -(xx - 2.0 * y * dot + 1.0) / (2.0 * s2)
        })
        .collect();
    let m = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + exps.iter().map(|e| (e - m).exp()).sum::<f64>().ln();
    let dim = shape.dim() as f64;
    Ok(lse - (2.0 * shape.k as f64).ln() - 0.5 * dim * (2.0 * std::f64::consts::PI * s2).ln())
}

pub fn dsd_pdf(spec: &TaskSpec, x: &[f64], y: f64) -> Result<f64> {
    Ok(dsd_log_pdf(spec, x, y)?.exp())
}
