//! The two-step projected gradient trainers for LCN and CNN at the noise
//! level and sample counts their analyses assume.

use dsd_lab::datagen::{sample_dsd, TaskSpec};
use dsd_lab::patchspace::PatchShape;
use dsd_lab::training::{train_two_phase_cnn, train_two_phase_lcn, two_phase_cnn_samples, two_phase_lcn_samples};

fn main() -> dsd_lab::Result<()> {
    let shape = PatchShape::new(20, 20)?;
    let sigma = TaskSpec::two_phase_sigma(shape);
    let n_lcn = two_phase_lcn_samples(shape, sigma);
    let n_cnn = two_phase_cnn_samples(shape, sigma);
    println!("k = d = 20, sigma = {sigma:.2e}; LCN uses {n_lcn} samples, CNN uses {n_cnn}");
    for seed in 0..3 {
        let spec = TaskSpec::with_random_signal(shape, sigma, seed)?;
        let lcn = train_two_phase_lcn(&spec, &sample_dsd(&spec, n_lcn, 100 + seed)?, seed)?;
        let cnn = train_two_phase_cnn(&spec, &sample_dsd(&spec, n_cnn, 200 + seed)?, seed)?;
        let lcn_min = lcn.final_alignment().into_iter().fold(f64::INFINITY, f64::min);
        println!(
            "seed {seed}: LCN min node alignment {lcn_min:.4} (after step 1: {:.4}), CNN alignment {:.4}",
            lcn.alignment_per_iter[0].iter().cloned().fold(f64::INFINITY, f64::min),
            cnn.final_alignment()[0]
        );
    }
    Ok(())
}
