use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::complexity::{ComplexityRow, ComplexitySweep};
use super::sweep::{group_cells, SweepCell, SweepReport, SweepRow};
use crate::error::Result;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

const SWEEP_HEADER: [&str; 9] = ["kind", "k", "d", "n", "replicate", "seed", "test_error", "selected_lr", "selected_bias"];
const COMPLEXITY_HEADER: [&str; 8] = ["kind", "k", "d", "replicate", "seed", "min_n", "target_loss", "saturated"];

/// JSON sidecar written next to every CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata<C, A> {
    pub artifact_version: String,
    pub wall_clock_seconds: f64,
    pub config: C,
    pub aggregates: A,
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Mean and standard deviation of `test_error` per `(kind, k, d, n)`.
pub fn aggregate_sweep_rows(rows: &[SweepRow]) -> Vec<SweepCell> {
    group_cells(rows.iter().map(|r| ((r.kind, r.k, r.d, r.n), r.test_error)))
        .into_iter()
        .map(|((kind, k, d, n), mean, std, count)| SweepCell { kind, k, d, n, mean, std, count })
        .collect()
}

/// Writes `sweep.csv` (long format) and `sweep.json` (config echo, version,
/// wall clock, per-cell aggregates and failures).
pub fn emit_sweep_report(report: &SweepReport, dir: &Path, wall_clock: Duration) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("sweep.csv");
    write_csv(&csv_path, &SWEEP_HEADER, &report.rows)?;
    let json_path = dir.join("sweep.json");
    #[derive(Serialize)]
    struct Aggregates<'a> {
        cells: &'a [SweepCell],
        failures: &'a [super::SweepFailure],
    }
    let meta = Metadata {
        artifact_version: ARTIFACT_VERSION.to_string(),
        wall_clock_seconds: wall_clock.as_secs_f64(),
        config: &report.config,
        aggregates: Aggregates { cells: &report.cells, failures: &report.failures },
    };
    fs::write(&json_path, serde_json::to_string_pretty(&meta)?)?;
    Ok(vec![csv_path, json_path])
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    read_csv(path)
}

/// Writes `complexity.csv` and `complexity.json` (which also keeps every probe).
pub fn emit_complexity_report(sweep: &ComplexitySweep, dir: &Path, wall_clock: Duration) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("complexity.csv");
    write_csv(&csv_path, &COMPLEXITY_HEADER, &sweep.rows())?;
    let json_path = dir.join("complexity.json");
    let meta = Metadata {
        artifact_version: ARTIFACT_VERSION.to_string(),
        wall_clock_seconds: wall_clock.as_secs_f64(),
        config: &sweep.config,
        aggregates: &sweep.results,
    };
    fs::write(&json_path, serde_json::to_string_pretty(&meta)?)?;
    Ok(vec![csv_path, json_path])
}

pub fn read_complexity_csv(path: &Path) -> Result<Vec<ComplexityRow>> {
    read_csv(path)
}
