//! Sampling the dynamic and static signal tasks, transformed tasks, and the
//! DSD density.

use dsd_lab::datagen::{dsd_log_pdf, mu_vector, sample_dsd, sample_ssd, sample_transformed, Base, TaskSpec};
use dsd_lab::patchspace::{random_transform, PatchShape};
use dsd_lab::rng::seeded;

fn main() -> dsd_lab::Result<()> {
    let spec = TaskSpec::with_random_signal(PatchShape::new(4, 3)?, 0.1, 7)?;
    println!("signal w* = {:?}", spec.signal.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());

    let dsd = sample_dsd(&spec, 2000, 1)?;
    let mut counts = vec![0usize; spec.shape.k];
    for s in &dsd.samples {
        counts[s.latent_patch.expect("DSD records the patch")] += 1;
    }
    println!("DSD: {} samples, signal patch counts {counts:?}", dsd.len());

    // Averaging y·x over SSD_2 recovers μ_2.
    let ssd = sample_ssd(&spec, 2, 5000, 2)?;
    let mut mean = vec![0.0; spec.dim()];
    for s in &ssd.samples {
        for (m, v) in mean.iter_mut().zip(&s.x) {
            *m += s.y * v / ssd.len() as f64;
        }
    }
    let mu = mu_vector(&spec, 2)?;
    let err = mean.iter().zip(&mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("SSD_2: max |mean(y x) - mu_2| = {err:.4}");

    let t = random_transform(spec.shape, false, &mut seeded(3))?;
    let moved = sample_transformed(&spec, Base::Dsd, &t, 3, 4)?;
    println!("transformed task {} -> first label {}", t.id(), moved.samples[0].y);

    let s = &dsd.samples[0];
    println!("log p(x, y) of the first DSD sample: {:.3}", dsd_log_pdf(&spec, &s.x, s.y)?);

    let dir = std::env::temp_dir().join("dsd_lab_example");
    std::fs::create_dir_all(&dir)?;
    dsd.write_csv(&dir.join("dsd.csv"))?;
    dsd.write_sidecar(&dir.join("dsd.json"))?;
    println!("wrote {}", dir.join("dsd.csv").display());
    Ok(())
}
