//! Lower-bound toolkit: KL divergence between transformed static tasks, the
//! Fano bound, a greedy packing, closed-form LSA moments and the LCN risk floor.

use dsd_lab::models::{ModelKind, ModelParams};
use dsd_lab::patchspace::PatchShape;
use dsd_lab::rng::seeded;
use dsd_lab::theory::{fano_lower_bound, gv_packing, kl_transformed_ssd, lsa_mean, lsa_mean_db, risk_floor, FanoInputs};

fn main() -> dsd_lab::Result<()> {
    let sigma = 0.5;
    for cos in [1.0, 0.5, 0.0] {
        let kl = kl_transformed_ssd(&[1.0, 0.0], &[cos, (1.0f64 - cos * cos).sqrt()], sigma)?;
        println!("KL at cos = {cos}: {kl:.3}");
    }

    // FCN-style instantiation: D = 1/(2σ²), ln M proportional to kd.
    let (k, d) = (10.0, 10.0);
    for n in [0.0, 5.0, 10.0, 20.0] {
        let inp = FanoInputs::with_ln_cardinality(0.25, n, 0.5, 0.15 * k * d)?;
        println!("Fano bound at n = {n:>4}: {:.4}", fano_lower_bound(&inp));
    }

    let set = gv_packing(40, 0.5, 100_000, &mut seeded(1))?;
    println!("packing in R^40 with dot < 0.5: {} vectors, max dot {:.3}", set.len(), set.max_pairwise_dot());

    for (mu, s, b) in [(1.0, 1.0, 0.0), (1.0, 1.0, 0.5), (0.0, 0.3, 0.2)] {
        println!("E phi_b(mu + s e) at ({mu}, {s}, {b}) = {:.5}, d/db = {:.5}", lsa_mean(mu, s, b)?, lsa_mean_db(mu, s, b)?);
    }

    let shape = PatchShape::new(3, 2)?;
    let p = ModelParams::new(ModelKind::Lcn, shape, vec![vec![0.6, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]], 0.01)?;
    println!("LCN risk floor along e1: {:.3}", risk_floor(&p, &[1.0, 0.0])?);
    Ok(())
}
