//! Model, update, initialization and risk equivariance checks, plus a
//! constructed counterexample that the update check rejects.

use dsd_lab::datagen::{sample_dsd, TaskSpec};
use dsd_lab::equivariance::controls::shifted_update;
use dsd_lab::equivariance::{
    check_init_invariance, check_model_equivariance, check_risk_invariance, check_update_equivariance, schedule_run, TwoPhase,
    DEFAULT_LEVEL,
};
use dsd_lab::models::{ModelKind, ModelParams};
use dsd_lab::patchspace::{random_transform, PatchShape};
use dsd_lab::rng::seeded;
use dsd_lab::training::{init_params, initial_params, small_init_variance, TrainSchedule};

fn main() -> dsd_lab::Result<()> {
    let shape = PatchShape::new(4, 3)?;
    let spec = TaskSpec::with_random_signal(shape, 0.3, 1)?;
    let data = sample_dsd(&spec, 40, 2)?;
    let xs: Vec<Vec<f64>> = data.samples.iter().map(|s| s.x.clone()).collect();

    for (kind, tied) in [(ModelKind::Lcn, false), (ModelKind::Cnn, true)] {
        let g = random_transform(shape, tied, &mut seeded(3))?.into();
        let schedule = match kind {
            ModelKind::Lcn => TrainSchedule::two_phase_lcn(shape, 4),
            _ => TrainSchedule::two_phase_cnn(shape, 4),
        };
        let init = ModelParams { bias: 0.05, ..initial_params(kind, shape, &schedule)? };
        // Unit-scale weights: the tiny two-phase init sits inside the dead zone.
        let probe = ModelParams { bias: 0.05, ..init_params(kind, shape, 1.0 / shape.d as f64, &mut seeded(7))? };
        let m = check_model_equivariance(&probe, &g, &xs)?;
        let u = check_update_equivariance(&init, &g, &data.samples, schedule_run(&spec, &schedule))?;
        let bad = check_update_equivariance(&init, &g, &data.samples, shifted_update(schedule_run(&spec, &schedule)))?;
        let i = check_init_invariance(kind, shape, small_init_variance(shape), &g, 4000, DEFAULT_LEVEL, 5)?;
        let r = check_risk_invariance(&TwoPhase(kind), &spec, &g, 10, 48, 500, DEFAULT_LEVEL, 6)?;
        println!("{kind}:");
        println!("  model   {} (max residual {:.1e})", verdict(m.passed), m.max_residual);
        println!("  update  {} (max residual {:.1e})", verdict(u.passed), u.max_residual);
        println!("  shifted {} (max residual {:.1e})", verdict(bad.passed), bad.max_residual);
        println!("  init    {} (smallest p-value {:.3})", verdict(i.passed), i.per_projection.iter().map(|o| o.p_value).fold(1.0, f64::min));
        println!("  risk    {} (max paired difference {:.1e})", verdict(r.passed), r.max_paired_difference);
    }
    Ok(())
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "FAIL"
    }
}
