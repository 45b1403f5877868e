//! Grid-search training over step sizes and biases, scored on held-out data.

use dsd_lab::datagen::{sample_dsd, TaskSpec};
use dsd_lab::models::ModelKind;
use dsd_lab::patchspace::PatchShape;
use dsd_lab::training::{grid_search_train, GRID_ITERATIONS, DEFAULT_BIAS_GRID, DEFAULT_WEIGHT_LRS};

fn main() -> dsd_lab::Result<()> {
    let spec = TaskSpec::with_random_signal(PatchShape::new(8, 8)?, 0.12, 11)?;
    let train = sample_dsd(&spec, 100, 1)?;
    let test = sample_dsd(&spec, 5000, 2)?;
    for kind in ModelKind::ALL {
        let g = grid_search_train(kind, &spec, &train, &test, &DEFAULT_WEIGHT_LRS, &DEFAULT_BIAS_GRID, GRID_ITERATIONS, 3)?;
        println!(
            "{kind}: test error {:.4} with lr {} and bias {} ({} cells)",
            g.test_error,
            g.selected_lr,
            g.selected_bias,
            g.cells.len()
        );
    }
    Ok(())
}
