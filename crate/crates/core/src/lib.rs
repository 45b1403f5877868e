//! Laboratory for the dynamic signal distribution (DSD) classification task.
//!
//! Inputs are `k` contiguous patches of dimension `d`. A unit signal vector
//! `w*` is planted in one uniformly chosen patch with a random sign (the
//! label) and isotropic Gaussian noise is added everywhere. The crate
//! provides:
//!
//! - [`patchspace`]: patch-structured orthogonal transforms (per-patch
//!   rotations composed with patch permutations) and Haar sampling.
//! - [`datagen`]: DSD / SSD samplers, transformed samplers and the DSD density.
//! - [`models`]: the soft-threshold (LSA) activation and the FCN, LCN and CNN
//!   function forms with squared loss, analytic gradients and Monte Carlo risk.
//! - [`training`]: projected gradient training, the two-phase LCN/CNN trainers
//!   and the grid-search trainer.
//! - [`theory`]: KL divergence, Fano bound, packing construction, closed-form
//!   LSA moments, the LCN risk floor and the FCN identification/boosting steps.
//! - [`equivariance`]: executable checks of model, update, initialization and
//!   risk equivariance.
//! - [`experiments`]: test-error sweeps, binary-search sample complexity,
//!   reports and SVG plots.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod datagen;
pub mod equivariance;
pub mod error;
pub mod experiments;
pub mod models;
pub mod patchspace;
pub mod rng;
pub mod stats;
pub mod theory;
pub mod training;

pub use datagen::{Base, Dataset, Distribution, LabeledSample, TaskSpec};
pub use error::{Error, Result};
pub use models::{ModelKind, ModelParams};
pub use patchspace::{PatchShape, PatchTransform};
pub use training::{TrainResult, TrainSchedule};
