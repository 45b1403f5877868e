//! A small test-error sweep over the three architectures, written as CSV and
//! JSON with SVG plots. The default CLI sweep uses k = d = 20.

use std::time::Instant;

use dsd_lab::experiments::plot::render_sweep_plots;
use dsd_lab::experiments::{emit_sweep_report, run_test_error_sweep, GridSettings, NoiseLevel, SweepConfig};

fn main() -> dsd_lab::Result<()> {
    let cfg = SweepConfig {
        k_values: vec![6],
        d_values: vec![6],
        sample_sizes: vec![10, 40, 160],
        replicates: 3,
        sigma: NoiseLevel::Fixed(0.12),
        grid: GridSettings { test_size: 2000, ..GridSettings::default() },
        ..SweepConfig::default()
    };
    let start = Instant::now();
    let report = run_test_error_sweep(&cfg)?;
    for c in &report.cells {
        println!("{} n = {:>3}: {:.4} ± {:.4}", c.kind, c.n, c.mean, c.std);
    }
    let dir = std::env::temp_dir().join("dsd_lab_sweep");
    for p in emit_sweep_report(&report, &dir, start.elapsed())?.into_iter().chain(render_sweep_plots(&report, &dir)?) {
        println!("wrote {}", p.display());
    }
    Ok(())
}
