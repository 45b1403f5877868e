//! Randomized greedy Gilbert–Varshamov packing on scaled binary vectors.
//!
//! Candidates are `u / sqrt(D)` with `u ∈ {0,1}^N` and exactly `D = N/2` ones.
//! Two candidates have inner product `overlap / D`, so the pairwise bound
//! `dot < c` is an overlap bound `overlap < c·D`.

use rand::Rng;
use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingSet {
    pub dim: usize,
    pub dot_bound: f64,
    pub vectors: Vec<Vec<f64>>,
    /// `(c ln c − c + 1)·N`, the log-cardinality the existence argument promises.
    pub target_ln_size: f64,
    /// Candidates drawn in total.
    pub attempts: usize,
}

impl PackingSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Largest pairwise inner product over distinct pairs (exhaustive).
    pub fn max_pairwise_dot(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (i, a) in self.vectors.iter().enumerate() {
            for b in &self.vectors[i + 1..] {
                worst = worst.max(a.iter().zip(b).map(|(x, y)| x * y).sum());
            }
        }
        worst
    }
}

pub fn gv_target_ln_size(n: usize, c: f64) -> f64 {
    (c * c.ln() - c + 1.0) * n as f64
}

/// Upper limit on the number of kept vectors. With `c` near 1 at large `N`
/// almost every candidate is accepted and the rejection counter never fills.
pub const PACKING_SIZE_CAP: usize = 20_000;

/// Draws `N/2`-sparse candidates and keeps each one whose inner product with
/// every kept vector is below `c`; stops after `max_attempts` consecutive
/// rejections or at [`PACKING_SIZE_CAP`] vectors.

pub fn gv_packing<R: Rng + ?Sized>(n: usize, c: f64, max_attempts: usize, rng: &mut R) -> Result<PackingSet> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("packing dimension must be even and >= 2, got {n}")));
    }
    if !(c >= 2.0 / n as f64 && c <= 1.0) {
        return Err(Error::InvalidParameter(format!("dot bound must lie in [2/N, 1], got {c}")));
    }
    let d = n / 2;
    let words = n.div_ceil(64);
    // overlap < c·D, i.e. overlap ≤ ceil(c·D) − 1
    let max_overlap = ((c * d as f64).ceil() as usize).saturating_sub(1);
    let mut kept: Vec<Vec<u64>> = Vec::new();
    let mut rejections = 0usize;
    let mut attempts = 0usize;
    while rejections < max_attempts && kept.len() < PACKING_SIZE_CAP {
        attempts += 1;
        let mut bits = vec![0u64; words];
        for i in sample_indices(rng, n, d) {
            bits[i / 64] |= 1 << (i % 64);
        }
        let ok = kept.iter().all(|k| {
            let overlap: u32 = k.iter().zip(&bits).map(|(a, b)| (a & b).count_ones()).sum();
            (overlap as usize) <= max_overlap
        });
        if ok {
            kept.push(bits);
            rejections = 0;
        } else {
            rejections += 1;
        }
    }
    let scale = 1.0 / (d as f64).sqrt();
    let vectors = kept
        .iter()
        .map(|bits| (0..n).map(|i| if bits[i / 64] >> (i % 64) & 1 == 1 { scale } else { 0.0 }).collect())
        .collect();
    Ok(PackingSet { dim: n, dot_bound: c, vectors, target_ln_size: gv_target_ln_size(n, c), attempts })
}
