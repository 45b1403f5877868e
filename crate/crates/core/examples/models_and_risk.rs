//! The soft-threshold activation, the three architectures, analytic gradients
//! and Monte Carlo risk.

use dsd_lab::datagen::{sample_dsd, Distribution, TaskSpec};
use dsd_lab::models::{empirical_loss, forward, grad_loss, lsa, risk_mc, ModelKind, ModelParams};
use dsd_lab::patchspace::PatchShape;
use dsd_lab::rng::seeded;
use dsd_lab::training::init_params;

fn main() -> dsd_lab::Result<()> {
    for x in [-1.0, -0.05, 0.0, 0.05, 1.0] {
        println!("lsa({x:5}, b = 0.1) = {:6.3}", lsa(x, 0.1)?);
    }

    let shape = PatchShape::new(4, 5)?;
    let spec = TaskSpec::with_random_signal(shape, 0.1, 2)?;
    let data = sample_dsd(&spec, 200, 3)?;
    let mut rng = seeded(4);
    for kind in ModelKind::ALL {
        let p = init_params(kind, shape, 0.1, &mut rng)?;
        let g = grad_loss(&p, &data.samples)?;
        let gnorm: f64 = g.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        println!(
            "{kind}: {} weight vectors of length {}, loss {:.4}, |grad| {:.4}",
            p.weights.len(),
            p.weights[0].len(),
            empirical_loss(&p, &data.samples)?,
            gnorm
        );
    }

    let oracle = ModelParams::cnn(shape, spec.signal.clone(), 0.01)?;
    let x = &data.samples[0];
    println!("oracle CNN on a sample with y = {}: f(x) = {:.3}", x.y, forward(&oracle, &x.x)?);
    let r = risk_mc(&oracle, &spec, &Distribution::dsd(), 100_000, &mut seeded(5))?;
    println!("oracle CNN risk: {:.4} ± {:.4}", r.mean, r.se);
    Ok(())
}
