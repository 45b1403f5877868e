//! Binary-search sample complexity of LCN and CNN on small shapes.

use std::time::Instant;

use dsd_lab::experiments::plot::render_complexity_plots;
use dsd_lab::experiments::{emit_complexity_report, run_complexity_sweep, ComplexityConfig, GridSettings};

fn main() -> dsd_lab::Result<()> {
    let cfg = ComplexityConfig {
        shapes: vec![(4, 8), (8, 8), (12, 8)],
        n_max: 400,
        replicates: 3,
        grid: GridSettings { test_size: 4000, ..GridSettings::default() },
        ..ComplexityConfig::default()
    };
    let start = Instant::now();
    let sweep = run_complexity_sweep(&cfg)?;
    for r in &sweep.results {
        println!("{} k = {:>2}, d = {}: minimal n {:?}, mean {:.1}", r.kind, r.k, r.d, r.min_ns(), r.mean);
    }
    let dir = std::env::temp_dir().join("dsd_lab_complexity");
    for p in emit_complexity_report(&sweep, &dir, start.elapsed())?.into_iter().chain(render_complexity_plots(&sweep, &dir)?) {
        println!("wrote {}", p.display());
    }
    Ok(())
}
