use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dsd_lab::datagen::{sample_dsd, TaskSpec};
use dsd_lab::experiments::plot::{render_complexity_plots, render_sweep_plots};
use dsd_lab::equivariance::{
    check_init_invariance, check_model_equivariance, check_risk_invariance, check_update_equivariance, random_dense, schedule_run,
    GroupElement, TwoPhase, DEFAULT_LEVEL,
};
use dsd_lab::experiments::{
    aggregate_sweep_rows, emit_complexity_report, emit_sweep_report, default_complexity_shapes, read_sweep_csv,
    run_boosting_demo, run_complexity_sweep, run_test_error_sweep, ComplexityConfig, ComplexityResult,
    ComplexitySweep, GridSettings, Metadata, NoiseLevel, SweepConfig, SweepReport,
};
use dsd_lab::models::{ModelKind, ModelParams};
use dsd_lab::patchspace::{random_transform, PatchShape};
use dsd_lab::rng::{derive_seed, seeded};
use dsd_lab::theory::{fano_lower_bound, gv_packing, kl_transformed_ssd, lsa_mean, lsa_mean_db, lsa_second_moment, FanoInputs};
use dsd_lab::training::{
    grid_init_variance, init_params, initial_params, train_generic, train_two_phase_cnn, train_two_phase_lcn, two_phase_cnn_samples,
    two_phase_lcn_samples, TrainSchedule, GRID_ITERATIONS,
};
use dsd_lab::{Error, Result};

#[derive(Parser)]
#[command(name = "dsdlab", version, about = "Training, checks and experiments on the dynamic signal distribution task")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and print (or write) the training record as JSON.
    Train(TrainArgs),
    /// Closed-form quantities from the lower-bound toolkit.
    #[command(subcommand)]
    Theory(TheoryCommand),
    /// Run an equivariance or invariance check.
    EquivarianceCheck(EquivarianceArgs),
    /// Test error against training-set size.
    Sweep(SweepArgs),
    /// Binary-search sample complexity.
    Complexity(ComplexityArgs),
    /// FCN identification and boosting on the static task.
    BoostDemo(BoostArgs),
    /// Render SVG plots from sweep.csv / complexity.json in a directory.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleName {
    Lcn2,
    Cnn2,
    Generic,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value = "cnn")]
    kind: ModelKind,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    d: usize,
    /// Noise level; defaults to the two-phase analysis value for lcn2/cnn2 and 0.12 otherwise.
    #[arg(long)]
    sigma: Option<f64>,
    /// Training samples; defaults to the two-phase sample count for lcn2/cnn2.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "generic")]
    schedule: ScheduleName,
    /// Generic schedule: constant step size.
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    /// Generic schedule: constant bias.
    #[arg(long, default_value_t = 1e-3)]
    bias: f64,
    /// Generic schedule: iterations.
    #[arg(long, default_value_t = GRID_ITERATIONS)]
    iterations: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TheoryCommand {
    /// KL divergence between two transformed static tasks whose means have cosine `cos`.
    Kl {
        #[arg(long)]
        cos: f64,
        #[arg(long)]
        sigma: f64,
    },
    /// Fano lower bound δ(1 − (nD + ln 2)/ln M).
    Fano {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: f64,
        /// Pairwise KL bound D.
        #[arg(long)]
        kl: f64,
        /// ln M.
        #[arg(long)]
        ln_m: f64,
    },
    /// Greedy packing of sparse binary vectors with pairwise inner products below `c`.
    Packing {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 100_000)]
        attempts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// E φ_b(μ + σε), its b-derivative and second moment.
    LsaMean {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        b: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckName {
    Model,
    Update,
    Init,
    Risk,
}

#[derive(Args)]
struct EquivarianceArgs {
    #[arg(long, default_value = "cnn")]
    kind: ModelKind,
    #[arg(long, value_enum)]
    check: CheckName,
    /// Random (transform, data, init) draws.
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0.3)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Comma-separated model kinds.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<ModelKind>>,
    #[arg(long, value_delimiter = ',')]
    k_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    d_list: Option<Vec<usize>>,
    /// Noise level: a number or `inv-sqrt-k`.
    #[arg(long)]
    sigma: Option<NoiseLevel>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iterations per grid cell.
    #[arg(long, default_value_t = GRID_ITERATIONS)]
    iterations: usize,
    #[arg(long, default_value_t = 10_000)]
    test_size: usize,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Skip the SVG plots.
    #[arg(long)]
    no_plots: bool,
}

impl ExperimentArgs {
    fn grid(&self) -> GridSettings {
        GridSettings { iterations: self.iterations, test_size: self.test_size, ..GridSettings::default() }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Shapes are the product of --k-list and --d-list; without either, the
    /// k-axis and d-axis shapes around (20, 20).
    #[command(flatten)]
    common: ExperimentArgs,
    #[arg(long, default_value_t = 0.03)]
    tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    n_max: usize,
    /// Training samples spent per probe.
    #[arg(long, default_value_t = 300)]
    probe_samples: usize,
}

#[derive(Args)]
struct BoostArgs {
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    d: usize,
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    /// Training samples per section.
    #[arg(long, default_value_t = 50)]
    budget: usize,
    #[arg(long, default_value_t = 20)]
    sections: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = GRID_ITERATIONS)]
    iterations: usize,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(p, text)?;
            eprintln!("wrote {}", p.display());
        }
        None => {
            // a closed downstream pipe (e.g. `| head`) is not an error
            if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn train(a: &TrainArgs) -> Result<()> {
    let shape = PatchShape::new(a.k, a.d)?;
    let result = match a.schedule {
        ScheduleName::Lcn2 | ScheduleName::Cnn2 => {
            let sigma = a.sigma.unwrap_or_else(|| TaskSpec::two_phase_sigma(shape));
            let spec = TaskSpec::with_random_signal(shape, sigma, a.seed)?;
            let lcn = matches!(a.schedule, ScheduleName::Lcn2);
            let n = a.n.unwrap_or(if lcn { two_phase_lcn_samples(shape, sigma) } else { two_phase_cnn_samples(shape, sigma) });
            let data = sample_dsd(&spec, n, derive_seed(a.seed, "train", 0))?;
            if lcn {
                train_two_phase_lcn(&spec, &data, a.seed)?
            } else {
                train_two_phase_cnn(&spec, &data, a.seed)?
            }
        }
        ScheduleName::Generic => {
            let spec = TaskSpec::with_random_signal(shape, a.sigma.unwrap_or(0.12), a.seed)?;
            let n = a.n.ok_or_else(|| Error::InvalidParameter("--n is required for the generic schedule".into()))?;
            let data = sample_dsd(&spec, n, derive_seed(a.seed, "train", 0))?;
            let schedule = TrainSchedule::constant(a.iterations, a.lr, a.bias, grid_init_variance(a.kind, shape), a.seed)?;
            train_generic(a.kind, &spec, &schedule, &data)?
        }
    };
    emit_json(&result, a.out.as_deref())
}

fn theory(cmd: &TheoryCommand) -> Result<()> {
    match *cmd {
        TheoryCommand::Kl { cos, sigma } => {
            if !(-1.0..=1.0).contains(&cos) {
                return Err(Error::InvalidParameter(format!("cos must lie in [-1, 1], got {cos}")));
            }
            let u = [1.0, 0.0];
            let v = [cos, (1.0 - cos * cos).sqrt()];
            let kl = kl_transformed_ssd(&u, &v, sigma)?;
            emit_json(&serde_json::json!({ "cos": cos, "sigma": sigma, "kl": kl }), None)
        }
        TheoryCommand::Fano { delta, n, kl, ln_m } => {
            let inp = FanoInputs::with_ln_cardinality(delta, n, kl, ln_m)?;
            emit_json(&serde_json::json!({ "inputs": inp, "bound": fano_lower_bound(&inp) }), None)
        }
        TheoryCommand::Packing { dim, c, attempts, seed } => {
            let set = gv_packing(dim, c, attempts, &mut seeded(seed))?;
            let max_dot = set.max_pairwise_dot();
            emit_json(&serde_json::json!({ "size": set.len(), "max_pairwise_dot": max_dot, "packing": set }), None)
        }
        TheoryCommand::LsaMean { mu, sigma, b } => emit_json(
            &serde_json::json!({
                "mu": mu, "sigma": sigma, "b": b,
                "mean": lsa_mean(mu, sigma, b)?,
                "mean_db": lsa_mean_db(mu, sigma, b)?,
                "second_moment": lsa_second_moment(mu, sigma, b)?,
            }),
            None,
        ),
    }
}

/// Transform drawn from the group that the kind's trainer respects.
fn group_element(kind: ModelKind, shape: PatchShape, seed: u64) -> Result<GroupElement> {
    let mut rng = seeded(derive_seed(seed, "group", 0));
    match kind {
        ModelKind::Fcn => random_dense(shape, &mut rng),
        ModelKind::Lcn => Ok(random_transform(shape, false, &mut rng)?.into()),
        ModelKind::Cnn => Ok(random_transform(shape, true, &mut rng)?.into()),
    }
}

fn schedule_for(kind: ModelKind, shape: PatchShape, seed: u64) -> Result<TrainSchedule> {
    match kind {
        ModelKind::Lcn => Ok(TrainSchedule::two_phase_lcn(shape, seed)),
        ModelKind::Cnn => Ok(TrainSchedule::two_phase_cnn(shape, seed)),
        ModelKind::Fcn => TrainSchedule::constant(5, 0.1, 1e-3, grid_init_variance(kind, shape), seed),
    }
}

fn equivariance(a: &EquivarianceArgs) -> Result<()> {
    let shape = PatchShape::new(a.k, a.d)?;
    let report = match a.check {
        CheckName::Model | CheckName::Update => {
            let mut reports = Vec::with_capacity(a.seeds);
            for s in 0..a.seeds as u64 {
                let seed = derive_seed(a.seed, "draw", s);
                let g = group_element(a.kind, shape, seed)?;
                let spec = TaskSpec::with_random_signal(shape, a.sigma, seed)?;
                let data = sample_dsd(&spec, 2 * shape.k * shape.d, derive_seed(seed, "data", 0))?;
                let schedule = schedule_for(a.kind, shape, seed)?;
                let init = initial_params(a.kind, shape, &schedule)?;
                let init = ModelParams { bias: 0.05, ..init };
                let r = match a.check {
                    CheckName::Model => {
                        let xs: Vec<Vec<f64>> = data.samples.iter().map(|s| s.x.clone()).collect();
                        let mut rng = seeded(derive_seed(seed, "weights", 0));
                        let p = ModelParams { bias: 0.05, ..init_params(a.kind, shape, 1.0 / shape.d as f64, &mut rng)? };
                        check_model_equivariance(&p, &g, &xs)?
                    }
                    _ => check_update_equivariance(&init, &g, &data.samples, schedule_run(&spec, &schedule))?,
                };
                reports.push(r);
            }
            let merged = reports.iter().copied().reduce(|a, b| a.merge(b)).ok_or_else(|| Error::InvalidParameter("--seeds must be positive".into()))?;
            serde_json::json!({ "kind": a.kind, "check": "identity", "summary": merged, "draws": reports })
        }
        CheckName::Init => {
            let g = group_element(a.kind, shape, a.seed)?;
            let gamma = grid_init_variance(a.kind, shape);
            let r = check_init_invariance(a.kind, shape, gamma, &g, a.seeds.max(1) * 500, DEFAULT_LEVEL, a.seed)?;
            serde_json::json!({ "kind": a.kind, "check": "init", "report": r })
        }
        CheckName::Risk => {
            let g = group_element(a.kind, shape, a.seed)?;
            let spec = TaskSpec::with_random_signal(shape, a.sigma, a.seed)?;
            let r = check_risk_invariance(&TwoPhase(a.kind), &spec, &g, a.seeds, 4 * shape.dim(), 2000, DEFAULT_LEVEL, a.seed)?;
            serde_json::json!({ "kind": a.kind, "check": "risk", "report": r })
        }
    };
    let passed = report["summary"]["passed"].as_bool().or_else(|| report["report"]["passed"].as_bool()).unwrap_or(false);
    emit_json(&report, a.report.as_deref())?;
    eprintln!("{}", if passed { "PASS" } else { "FAIL" });
    Ok(())
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let c = &a.common;
    let defaults = SweepConfig::default();
    let cfg = SweepConfig {
        kinds: c.kinds.clone().unwrap_or(defaults.kinds),
        k_values: c.k_list.clone().unwrap_or(defaults.k_values),
        d_values: c.d_list.clone().unwrap_or(defaults.d_values),
        sample_sizes: a.n_list.clone().unwrap_or(defaults.sample_sizes),
        replicates: c.reps.unwrap_or(defaults.replicates),
        sigma: c.sigma.unwrap_or(defaults.sigma),
        grid: c.grid(),
        master_seed: c.seed,
    };
    let start = Instant::now();
    let report = run_test_error_sweep(&cfg)?;
    print_paths(&emit_sweep_report(&report, &c.out_dir, start.elapsed())?);
    for f in &report.failures {
        eprintln!("failed {} k={} d={} n={} rep={}: {}", f.kind, f.k, f.d, f.n, f.replicate, f.message);
    }
    for cell in &report.cells {
        println!("{} k={} d={} n={}: {:.4} ± {:.4}", cell.kind, cell.k, cell.d, cell.n, cell.mean, cell.std);
    }
    if !c.no_plots {
        print_paths(&render_sweep_plots(&report, &c.out_dir)?);
    }
    Ok(())
}

fn complexity(a: &ComplexityArgs) -> Result<()> {
    let c = &a.common;
    let defaults = ComplexityConfig::default();
    let shapes = match (&c.k_list, &c.d_list) {
        (None, None) => default_complexity_shapes(),
        (ks, ds) => {
            let ks = ks.clone().unwrap_or_else(|| vec![20]);
            let ds = ds.clone().unwrap_or_else(|| vec![20]);
            ks.iter().flat_map(|&k| ds.iter().map(move |&d| (k, d))).collect()
        }
    };
    let cfg = ComplexityConfig {
        kinds: c.kinds.clone().unwrap_or(defaults.kinds),
        shapes,
        sigma: c.sigma.unwrap_or(defaults.sigma),
        tolerance: a.tolerance,
        n_max: a.n_max,
        replicates: c.reps.unwrap_or(defaults.replicates),
        grid: c.grid(),
        probe_samples: a.probe_samples,
        max_draws: defaults.max_draws,
        master_seed: c.seed,
    };
    let start = Instant::now();
    let sweep = run_complexity_sweep(&cfg)?;
    print_paths(&emit_complexity_report(&sweep, &c.out_dir, start.elapsed())?);
    for r in &sweep.results {
        println!("{} k={} d={}: mean {:.1} ± {:.1} {:?}", r.kind, r.k, r.d, r.mean, r.std, r.min_ns());
    }
    if !c.no_plots {
        print_paths(&render_complexity_plots(&sweep, &c.out_dir)?);
    }
    Ok(())
}

fn boost(a: &BoostArgs) -> Result<()> {
    let spec = TaskSpec::with_random_signal(PatchShape::new(a.k, a.d)?, a.sigma, a.seed)?;
    let grid = GridSettings { iterations: a.iterations, ..GridSettings::default() };
    let report = run_boosting_demo(&spec, a.budget, a.sections, &grid, a.seed)?;
    eprintln!(
        "boosted alignment {:.4}, best single section {}, identified {}/{}",
        report.boosted_alignment,
        report.max_single_alignment.map_or("none".to_string(), |v| format!("{v:.4}")),
        report.identified_sections,
        a.sections
    );
    emit_json(&report, a.out_dir.as_ref().map(|d| d.join("boost.json")).as_deref())
}

fn plot(a: &PlotArgs) -> Result<()> {
    let mut written = Vec::new();
    let sweep_csv = a.out_dir.join("sweep.csv");
    if sweep_csv.exists() {
        let rows = read_sweep_csv(&sweep_csv)?;
        let cells = aggregate_sweep_rows(&rows);
        let report = SweepReport { config: SweepConfig::default(), rows, failures: vec![], cells };
        written.extend(render_sweep_plots(&report, &a.out_dir)?);
    }
    let complexity_json = a.out_dir.join("complexity.json");
    if complexity_json.exists() {
        let meta: Metadata<ComplexityConfig, Vec<ComplexityResult>> = serde_json::from_str(&fs::read_to_string(&complexity_json)?)?;
        let sweep = ComplexitySweep { config: meta.config, results: meta.aggregates };
        written.extend(render_complexity_plots(&sweep, &a.out_dir)?);
    }
    if written.is_empty() {
        eprintln!("nothing to plot in {}", a.out_dir.display());
    }
    print_paths(&written);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Train(a) => train(a),
        Command::Theory(c) => theory(c),
        Command::EquivarianceCheck(a) => equivariance(a),
        Command::Sweep(a) => sweep(a),
        Command::Complexity(a) => complexity(a),
        Command::BoostDemo(a) => boost(a),
        Command::Plot(a) => plot(a),
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
