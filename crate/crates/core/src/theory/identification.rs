//! FCN node identification and the boosting aggregate built on it.

use crate::datagen::LabeledSample;
use crate::error::{Error, Result};
use crate::models::{dot, lsa_unchecked, ModelKind, ModelParams};

/// Pushes `y·x` through every FCN node and returns the first node whose
/// activation is positive.
pub fn identify_aligned_node(params: &ModelParams, sample: &LabeledSample) -> Result<Option<usize>> {
    if params.kind != ModelKind::Fcn {
        return Err(Error::Incompatible(format!("identification needs an FCN, got {}", params.kind)));
    }
    params.shape.check_len(&sample.x)?;
    Ok(params
        .weights
        .iter()
        .position(|w| lsa_unchecked(sample.y * dot(w, &sample.x), params.bias) > 0.0))
}

/// Sums the per-section estimates (zero vectors mark failed sections) and
/// projects onto the unit sphere; returns `e_1` when the sum vanishes.
pub fn boost_mean(section_estimates: &[Vec<f64>]) -> Result<Vec<f64>> {
    let dim = section_estimates
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidParameter("no section estimates".into()))?;
    let mut sum = vec![0.0; dim];
    for w in section_estimates {
        if w.len() != dim {
            return Err(Error::ShapeMismatch { expected: dim, got: w.len() });
        }
        sum.iter_mut().zip(w).for_each(|(s, v)| *s += v);
    }
    let norm = dot(&sum, &sum).sqrt();
    if norm == 0.0 {
        let mut e1 = vec![0.0; dim];
        e1[0] = 1.0;
        return Ok(e1);
    }
    Ok(sum.into_iter().map(|v| v / norm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{mu_vector, sample_ssd, TaskSpec};
    use crate::patchspace::PatchShape;
    use crate::rng::seeded;
    use crate::stats::normal_cdf;
    use rand_distr::{Distribution, StandardNormal};

    fn fcn(weights: Vec<Vec<f64>>, shape: PatchShape, b: f64) -> ModelParams {
        ModelParams::new(ModelKind::Fcn, shape, weights, b).unwrap()
    }

    #[test]
    fn identifies_mean_aligned_first_node() {
        let shape = PatchShape::new(2, 2).unwrap();
        let spec = TaskSpec::with_first_axis_signal(shape, 1e-12, 0).unwrap();
        let mu = mu_vector(&spec, 0).unwrap();
        let p = fcn(vec![mu.clone(), vec![0.0, 1.0, 0.0, 0.0]], shape, 0.01);
        let data = sample_ssd(&spec, 0, 20, 1).unwrap();
        for s in &data.samples {
            assert_eq!(identify_aligned_node(&p, s).unwrap(), Some(0));
        }
        let p = fcn(vec![vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]], shape, 0.01);
        for s in &data.samples {
            assert_eq!(identify_aligned_node(&p, s).unwrap(), None);
        }
    }

    #[test]
    fn weakly_aligned_node_success_frequency() {
        // Node with cos α = b_min/2 = 0.005, σ = 0.001; the remaining nodes are
        // orthogonal to the mean. Oracle: success ≥ 1 − k Φ(−b_min/(2σ)).
        let (k, d) = (3, 4);
        let shape = PatchShape::new(k, d).unwrap();
        let sigma = 0.001;
        let b_min: f64 = 0.01;
        let spec = TaskSpec::with_first_axis_signal(shape, sigma, 0).unwrap();
        let mu = mu_vector(&spec, 0).unwrap();
        let cos: f64 = b_min / 2.0;
        let mut w0 = vec![0.0; k * d];
        w0[0] = cos;
        w0[1] = (1.0 - cos * cos).sqrt();
        let mut w1 = vec![0.0; k * d];
        w1[5] = 1.0;
        let mut w2 = vec![0.0; k * d];
        w2[9] = 1.0;
        let p = fcn(vec![w0, w1, w2], shape, 0.0);
        assert!((dot(&p.weights[0], &mu) - cos).abs() < 1e-15);
        let n = 10_000;
        let data = sample_ssd(&spec, 0, n, 2).unwrap();
        let hits = data.samples.iter().filter(|s| identify_aligned_node(&p, s).unwrap() == Some(0)).count();
        let p_fail = (k as f64 * normal_cdf(-b_min / (2.0 * sigma))).min(1.0);
        let floor = 1.0 - p_fail;
        let sd = (n as f64 * floor * (1.0 - floor)).sqrt();
        assert!(hits as f64 >= n as f64 * floor - 3.0 * sd, "hits {hits}, floor {floor}");
    }

    #[test]
    fn boost_examples() {
        let w = vec![0.0, 0.6, 0.8];
        let got = boost_mean(&[w.clone(), w.clone(), w.clone()]).unwrap();
        assert!(got.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-15));
        assert_eq!(boost_mean(&[vec![0.0; 3], vec![0.0; 3]]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert!(boost_mean(&[]).is_err());
    }

    #[test]
    fn boost_matches_sum_and_normalize() {
        let mut rng = seeded(3);
        let mut list: Vec<Vec<f64>> = (0..15)
            .map(|_| (0..6).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        list[3] = vec![0.0; 6];
        list[8] = vec![0.0; 6];
        let mut s = [0.0f64; 6];
        for w in &list {
            for c in 0..6 {
                s[c] += w[c];
            }
        }
        let n = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (a, b) in boost_mean(&list).unwrap().iter().zip(s.iter()) {
            assert!((a - b / n).abs() < 1e-12);
        }
    }
}
