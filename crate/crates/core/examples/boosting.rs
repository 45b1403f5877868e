//! Identification and boosting: weakly aligned FCN nodes from independent
//! sections are averaged into a better estimate of the mean.

use dsd_lab::datagen::TaskSpec;
use dsd_lab::experiments::{run_boosting_demo, GridSettings};
use dsd_lab::patchspace::PatchShape;

fn main() -> dsd_lab::Result<()> {
    let spec = TaskSpec::with_random_signal(PatchShape::new(4, 8)?, 0.05, 3)?;
    for seed in 0..3 {
        let r = run_boosting_demo(&spec, 20, 20, &GridSettings::default(), seed)?;
        println!(
            "seed {seed}: {} / {} sections identified, best single {:.3}, boosted {:.3}",
            r.identified_sections,
            r.sections.len(),
            r.max_single_alignment.unwrap_or(f64::NAN),
            r.boosted_alignment
        );
    }
    Ok(())
}
