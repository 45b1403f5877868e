//! Exact, construction-level examples. Each entry is `(name, passed)`.

use dsd_lab::datagen::{dsd_pdf, mu_vector, sample_dsd, sample_ssd, sample_transformed, Base, Dataset, Distribution, LabeledSample, TaskSpec};
use dsd_lab::equivariance::{check_init_invariance, check_model_equivariance, check_risk_invariance, check_update_equivariance, lift, schedule_step, GroupElement, TwoPhase};
use dsd_lab::experiments::plot::render_sweep_plots;
use dsd_lab::experiments::{
    binary_search_min_n, emit_sweep_report, optimal_loss, read_sweep_csv, aggregate_sweep_rows, run_boosting_demo_with, run_test_error_sweep,
    GridSettings, NoiseLevel, SweepConfig, SweepReport,
};
use dsd_lab::models::{empirical_loss, forward, grad_loss, lsa, lsa_deriv, risk_mc, ModelKind, ModelParams};
use dsd_lab::patchspace::{haar_orthogonal, random_transform, Matrix, PatchShape, PatchTransform};
use dsd_lab::rng::seeded;
use dsd_lab::theory::{
    boost_mean, fano_lower_bound, gv_packing, identify_aligned_node, kl_transformed_ssd, lsa_mean, lsa_mean_db, risk_floor, semi_metric_check,
    FanoInputs,
};
use dsd_lab::training::{
    alignment, grid_search_train, init_params, projected_update, train_from, train_generic, train_two_phase_cnn, train_two_phase_lcn,
    SplitPolicy, TrainSchedule, PlateauRule,
};
use dsd_lab::Result;
use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};

type Check = (&'static str, bool);

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn gauss(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn patchspace() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let signs: Vec<f64> = (0..400).map(|s| haar_orthogonal(1, &mut seeded(s)).map(|q| q.get(0, 0))).collect::<Result<_>>()?;
    let plus = signs.iter().filter(|&&v| v == 1.0).count();
    out.push(("haar d=1 is ±1, balanced", signs.iter().all(|&v| v == 1.0 || v == -1.0) && (160..=240).contains(&plus)));
    let mut ok = true;
    for d in 1..=12 {
        for s in 0..5 {
            ok &= haar_orthogonal(d, &mut seeded(s))?.orthogonality_residual() <= 1e-10;
        }
    }
    out.push(("haar orthogonality residual ≤ 1e-10", ok));

    let shape = PatchShape::new(4, 3)?;
    let tied = random_transform(shape, true, &mut seeded(1))?;
    out.push(("tied blocks identical", tied.blocks().iter().all(|b| b == &tied.blocks()[0])));
    let single = random_transform(PatchShape::new(1, 3)?, false, &mut seeded(2))?;
    out.push(("k=1 permutation is identity", single.perm() == [0]));

    let mut rng = seeded(3);
    let x = gauss(&mut rng, shape.dim());
    out.push(("identity transform leaves x", PatchTransform::identity(shape).apply(&x)? == x));
    let swap = PatchTransform::new(PatchShape::new(2, 1)?, vec![1, 0], vec![Matrix::identity(1), Matrix::identity(1)], false)?;
    out.push(("pure patch swap (a,b) → (b,a)", swap.apply(&[2.0, 5.0])? == vec![5.0, 2.0]));

    let t = random_transform(shape, false, &mut rng)?;
    let round = t.compose(&t.inverse())?;
    let id_t = PatchTransform::identity(shape).compose(&t)?;
    let (mut inv_ok, mut id_ok) = (true, true);
    for _ in 0..50 {
        let v = gauss(&mut rng, shape.dim());
        inv_ok &= max_abs_diff(&round.apply(&v)?, &v) <= 1e-9;
        id_ok &= max_abs_diff(&id_t.apply(&v)?, &t.apply(&v)?) <= 1e-12;
    }
    out.push(("T ∘ T⁻¹ returns vectors", inv_ok));
    out.push(("identity ∘ T acts as T", id_ok));
    Ok(out)
}

fn datagen() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let shape = PatchShape::new(3, 4)?;
    let e1 = TaskSpec::with_first_axis_signal(shape, 0.1, 0)?;
    let mut expect = vec![0.0; shape.dim()];
    expect[0] = 1.0;
    out.push(("μ_0 of e₁ signal is e₁", mu_vector(&e1, 0)? == expect));
    let spec = TaskSpec::with_random_signal(shape, 0.1, 1)?;
    let mus: Vec<Vec<f64>> = (0..3).map(|i| mu_vector(&spec, i)).collect::<Result<_>>()?;
    out.push(("‖μ_i‖ = 1", mus.iter().all(|m| (norm(m) - 1.0).abs() < 1e-12)));
    let orth = (0..3).all(|i| (0..3).all(|j| i == j || mus[i].iter().zip(&mus[j]).map(|(a, b)| a * b).sum::<f64>() == 0.0));
    out.push(("μ_i ⊥ μ_j", orth));

    let quiet = TaskSpec::with_random_signal(shape, 1e-12, 2)?;
    let dsd = sample_dsd(&quiet, 200, 3)?;
    let ok = dsd.samples.iter().all(|s| {
        let mu = mu_vector(&quiet, s.latent_patch.unwrap()).unwrap();
        s.x.iter().zip(&mu).all(|(x, m)| (x - s.y * m).abs() <= 1e-9)
    });
    out.push(("σ→0 DSD sample is yμ_latent", ok));
    let ssd = sample_ssd(&quiet, 2, 100, 4)?;
    let mu2 = mu_vector(&quiet, 2)?;
    out.push(("SSD_2 latent patch is 2", ssd.samples.iter().all(|s| s.latent_patch == Some(2))));
    out.push(("σ→0 SSD_2 sample is yμ_2", ssd.samples.iter().all(|s| max_abs_diff(&s.x, &mu2.iter().map(|m| s.y * m).collect::<Vec<_>>()) <= 1e-9)));

    let id = sample_transformed(&spec, Base::Dsd, &PatchTransform::identity(shape), 50, 5)?;
    let plain = sample_dsd(&spec, 50, 5)?;
    out.push(("identity-transformed dataset is bitwise equal", id.samples == plain.samples));
    let t = random_transform(shape, false, &mut seeded(6))?;
    let moved = sample_transformed(&quiet, Base::Dsd, &t, 100, 7)?;
    let ok = moved.samples.iter().all(|s| {
        let mu = t.apply(&mu_vector(&quiet, s.latent_patch.unwrap()).unwrap()).unwrap();
        s.x.iter().zip(&mu).all(|(x, m)| (x - s.y * m).abs() <= 1e-9)
    });
    out.push(("σ→0 transformed sample is y·Tμ_latent", ok));

    let mut rng = seeded(8);
    let sym = (0..50).all(|_| {
        let x = gauss(&mut rng, shape.dim());
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        dsd_pdf(&spec, &x, 1.0).unwrap() == dsd_pdf(&spec, &neg, -1.0).unwrap()
    });
    out.push(("pdf(x, +1) = pdf(−x, −1)", sym));
    Ok(out)
}

fn models() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut rng = seeded(10);
    out.push(("lsa(x, 0) = x", (0..100).all(|_| {
        let x: f64 = StandardNormal.sample(&mut rng);
        lsa(x, 0.0).unwrap() == x
    })));
    out.push(("lsa(0.5, 1) = 0", lsa(0.5, 1.0)? == 0.0));
    out.push(("lsa(±2, 0.5) = ±1.5", lsa(2.0, 0.5)? == 1.5 && lsa(-2.0, 0.5)? == -1.5));
    out.push(("lsa'(x, 0) = 1 for x ≠ 0", [-3.0, -1e-9, 1e-9, 2.0].iter().all(|&x| lsa_deriv(x, 0.0) == 1.0)));
    out.push(("lsa'(0.3, 0.5) = 0", lsa_deriv(0.3, 0.5) == 0.0));

    let shape = PatchShape::new(3, 4)?;
    let spec = TaskSpec::with_random_signal(shape, 1e-12, 11)?;
    let oracle = ModelParams::cnn(shape, spec.signal.clone(), 0.0)?;
    out.push(("CNN w=w*, b=0 on μ_0 gives 1", (forward(&oracle, &mu_vector(&spec, 0)?)? - 1.0).abs() < 1e-15));
    let zero = ModelParams::zeros(ModelKind::Lcn, shape);
    out.push(("zero weights give 0", forward(&zero, &gauss(&mut rng, shape.dim()))? == 0.0));
    let data = sample_dsd(&spec, 100, 12)?;
    out.push(("perfect predictor loss ≤ 1e-9", empirical_loss(&oracle, &data.samples)? <= 1e-9));
    out.push(("zero model loss = 1", empirical_loss(&zero, &data.samples)? == 1.0));

    let dead = ModelParams { bias: 1e6, ..init_params(ModelKind::Fcn, shape, 1.0, &mut rng)? };
    out.push(("dead zone gradient is exactly zero", grad_loss(&dead, &data.samples)?.iter().flatten().all(|&g| g == 0.0)));
    let one = PatchShape::new(1, 3)?;
    let w = gauss(&mut rng, 3);
    let x = gauss(&mut rng, 3);
    let p = ModelParams::cnn(one, w.clone(), 0.0)?;
    let s = LabeledSample::new(x.clone(), 1.0, None)?;
    let r = 1.0 - w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
    let expect: Vec<f64> = x.iter().map(|v| -2.0 * r * v).collect();
    out.push(("CNN k=1 gradient formula", max_abs_diff(&grad_loss(&p, &[s])?[0], &expect) <= 1e-14));

    let noisy = TaskSpec::with_random_signal(shape, 0.3, 13)?;
    let zr = risk_mc(&ModelParams::zeros(ModelKind::Cnn, shape), &noisy, &Distribution::dsd(), 1000, &mut seeded(14))?;
    out.push(("zero model risk = 1 ± 0", zr.mean == 1.0 && zr.se == 0.0));
    let or = risk_mc(&oracle, &spec, &Distribution::dsd(), 1000, &mut seeded(15))?;
    out.push(("oracle risk at σ→0 ≤ 1e-9", or.mean <= 1e-9));
    Ok(out)
}

fn training() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let shape = PatchShape::new(4, 4)?;
    out.push(("γ = 0 rejected", init_params(ModelKind::Cnn, shape, 0.0, &mut seeded(0)).is_err()
        && TrainSchedule::new(vec![1.0], vec![0.0], 0.0, SplitPolicy::Whole, 0).is_err()));
    out.push(("init deterministic", init_params(ModelKind::Lcn, shape, 0.1, &mut seeded(1))? == init_params(ModelKind::Lcn, shape, 0.1, &mut seeded(1))?));

    let mut unit_w = init_params(ModelKind::Lcn, shape, 1.0, &mut seeded(2))?;
    for w in &mut unit_w.weights {
        let n = norm(w);
        w.iter_mut().for_each(|v| *v /= n);
    }
    let zero_grad = vec![vec![0.0; 4]; 4];
    let step = projected_update(&unit_w, 0.5, 0.07, &zero_grad)?;
    out.push(("zero gradient keeps unit w, sets bias", max_abs_diff(&step.params.weights.concat(), &unit_w.weights.concat()) <= 1e-15 && step.params.bias == 0.07));
    let mut rng = seeded(3);
    let grad: Vec<Vec<f64>> = (0..4).map(|_| gauss(&mut rng, 4)).collect();
    let moved = projected_update(&unit_w, 3.0, 0.0, &grad)?;
    out.push(("projected update has unit norms", moved.params.weight_norms().iter().all(|n| (n - 1.0).abs() <= 1e-12)));

    let spec = TaskSpec::with_random_signal(shape, 0.05, 4)?;
    let data = sample_dsd(&spec, 40, 5)?;
    let lcn = train_two_phase_lcn(&spec, &data, 6)?;
    let cnn = train_two_phase_cnn(&spec, &data, 6)?;
    let unit = |p: &ModelParams| p.weight_norms().iter().all(|n| (n - 1.0).abs() <= 1e-9);
    out.push(("two-phase outputs unit-norm", unit(&lcn.params) && unit(&cnn.params)));
    out.push(("two-phase bit-identical reruns", lcn == train_two_phase_lcn(&spec, &data, 6)? && cnn == train_two_phase_cnn(&spec, &data, 6)?));

    let empty = TrainSchedule::new(vec![], vec![], 0.1, SplitPolicy::Whole, 7)?;
    let init = init_params(ModelKind::Fcn, shape, 0.1, &mut seeded(8))?;
    out.push(("T = 0 returns the initialization", train_from(init.clone(), &spec, &empty, &data.samples)?.params == init));

    let mut finite = true;
    for s in 0..100u64 {
        let mut r = seeded(100 + s);
        let kind = ModelKind::ALL[(s % 3) as usize];
        let sh = PatchShape::new(r.random_range(1..=4), r.random_range(1..=4))?;
        let sp = TaskSpec::with_random_signal(sh, r.random_range(0.01..1.0), s)?;
        let d = sample_dsd(&sp, r.random_range(2..=20), s)?;
        let sched = TrainSchedule::constant(10, r.random_range(1e-3..1.0), r.random_range(0.0..0.1), 0.1, s)?;
        finite &= train_generic(kind, &sp, &sched, &d)?.loss_per_iter.iter().all(|l| l.is_finite());
    }
    out.push(("loss trajectories finite (100 configs)", finite));

    let test = sample_dsd(&spec, 300, 9)?;
    let g = grid_search_train(ModelKind::Cnn, &spec, &data, &test, &[0.01], &[1e-3], 20, 10)?;
    let sched = TrainSchedule::constant(20, 0.01, 1e-3, dsd_lab::training::grid_init_variance(ModelKind::Cnn, shape), 10)?.with_plateau(PlateauRule::default());
    out.push(("single-cell grid equals generic training", g.best.params == train_generic(ModelKind::Cnn, &spec, &sched, &data)?.params));
    let full = grid_search_train(ModelKind::Lcn, &spec, &data, &test, &[0.1, 0.01, 0.001], &[1e-2, 1e-3, 1e-4], 20, 11)?;
    out.push(("grid returns the argmin cell", full.cells.iter().all(|c| full.test_error <= c.test_error)));

    let mut aligned = ModelParams::zeros(ModelKind::Lcn, shape);
    aligned.weights[0] = spec.signal.clone();
    let mut perp = gauss(&mut rng, 4);
    let c: f64 = perp.iter().zip(&spec.signal).map(|(a, b)| a * b).sum();
    perp.iter_mut().zip(&spec.signal).for_each(|(p, s)| *p -= c * s);
    aligned.weights[1] = perp;
    let a = alignment(&aligned, &spec)?;
    out.push(("alignment of w* is 1", (a[0] - 1.0).abs() < 1e-12));
    out.push(("alignment of w ⊥ w* is 0", a[1].abs() < 1e-12));
    Ok(out)
}

fn theory() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let u = [0.6, 0.8, 0.0];
    out.push(("KL(u, u) = 0", kl_transformed_ssd(&u, &u, 0.4)? == 0.0));
    out.push(("Fano n=0, M=2 is 0", fano_lower_bound(&FanoInputs::new(0.3, 0.0, 1.0, 2.0)?).abs() < 1e-15));
    let plug = fano_lower_bound(&FanoInputs::with_ln_cardinality(0.3, 4.0, 0.0, 2.0)?);
    out.push(("Fano D=0, M=e²", (plug - 0.3 * (1.0 - std::f64::consts::LN_2 / 2.0)).abs() < 1e-15));
    let p = gv_packing(2, 1.0, 100, &mut seeded(0))?;
    let mut vs = p.vectors.clone();
    vs.sort_by(|a, b| b[0].total_cmp(&a[0]));
    out.push(("packing N=2, c=1 is {e₁, e₂}", vs == vec![vec![1.0, 0.0], vec![0.0, 1.0]]));
    out.push(("E φ_0 = μ̄", [(-1.3, 0.4), (0.0, 2.0), (2.5, 0.1)].iter().all(|&(m, s)| (lsa_mean(m, s, 0.0).unwrap() - m).abs() < 1e-12)));
    out.push(("E φ_b at μ̄ = 0 is 0", lsa_mean(0.0, 0.7, 0.3)? == 0.0));
    out.push(("∂_b E φ_b at μ̄ = 0 is 0", lsa_mean_db(0.0, 0.7, 0.3)? == 0.0));

    let shape = PatchShape::new(3, 3)?;
    let dir = [1.0, 0.0, 0.0];
    let mut p = ModelParams::zeros(ModelKind::Lcn, shape);
    p.weights[0] = dir.to_vec();
    out.push(("risk floor of w₁ = u is 0", risk_floor(&p, &dir)? == 0.0));
    p.weights[0] = vec![-0.5, 0.3, 0.0];
    out.push(("risk floor with cos ≤ 0 is 1", risk_floor(&p, &dir)? == 1.0));
    let v = [0.0, 1.0, 0.0];
    p.weights[0] = vec![0.95, 0.0, 0.0];
    let r = semi_metric_check(&p, &dir, &v)?;
    out.push(("semi-metric: ρ_u = 0.0025, ρ_v = 1", (r.rho_u - 0.0025).abs() < 1e-15 && r.rho_v == 1.0 && r.holds));
    p.weights[0] = vec![0.5, 0.0, 0.0];
    let r = semi_metric_check(&p, &dir, &v)?;
    out.push(("semi-metric vacuous at ρ_u = 0.25", r.rho_u == 0.25 && r.holds));

    let spec = TaskSpec::with_random_signal(PatchShape::new(3, 4)?, 1e-12, 20)?;
    let mu = mu_vector(&spec, 0)?;
    let mut fcn = ModelParams::zeros(ModelKind::Fcn, spec.shape);
    fcn.bias = 0.01;
    fcn.weights[0] = mu.clone();
    fcn.weights[1] = mu_vector(&spec, 1)?;
    let sample = sample_ssd(&spec, 0, 1, 21)?.samples.remove(0);
    out.push(("identification finds the aligned node", identify_aligned_node(&fcn, &sample)? == Some(0)));
    fcn.weights[0] = mu_vector(&spec, 2)?;
    out.push(("identification with orthogonal nodes finds none", identify_aligned_node(&fcn, &sample)?.is_none()));
    out.push(("boosting identical w* returns w*", max_abs_diff(&boost_mean(&vec![mu.clone(); 5])?, &mu) <= 1e-15));
    Ok(out)
}

fn equivariance() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let shape = PatchShape::new(3, 2)?;
    let mut rng = seeded(30);
    let params = init_params(ModelKind::Lcn, shape, 1.0, &mut rng)?;
    let id: GroupElement = PatchTransform::identity(shape).into();
    out.push(("lift by identity is a no-op", lift(&id, &params)? == params));
    let two = PatchShape::new(2, 2)?;
    let swap: GroupElement = PatchTransform::permutation(two, vec![1, 0])?.into();
    let p2 = init_params(ModelKind::Lcn, two, 1.0, &mut rng)?;
    let l2 = lift(&swap, &p2)?;
    out.push(("LCN patch swap swaps nodes", l2.weights[0] == p2.weights[1] && l2.weights[1] == p2.weights[0]));
    let xs: Vec<Vec<f64>> = (0..10).map(|_| gauss(&mut rng, shape.dim())).collect();
    let m = check_model_equivariance(&params, &id, &xs)?;
    out.push(("model check at identity has residual 0", m.passed && m.max_residual == 0.0));

    let spec = TaskSpec::with_random_signal(shape, 0.2, 31)?;
    let data = sample_dsd(&spec, 10, 32)?;
    let mut dead = params.clone();
    for w in &mut dead.weights {
        let n = norm(w);
        w.iter_mut().for_each(|v| *v /= n);
    }
    dead.bias = 1e6;
    let sched = TrainSchedule::constant(1, 0.5, 0.02, 0.1, 0)?;
    let g: GroupElement = random_transform(shape, false, &mut rng)?.into();
    let r = check_update_equivariance(&dead, &g, &data.samples, schedule_step(&sched, 0))?;
    let expect = ModelParams { bias: 0.02, ..lift(&g, &dead)? };
    let stepped = schedule_step(&sched, 0)(&lift(&g, &dead)?, &g.transform_samples(&data.samples)?)?;
    out.push(("dead-zone update equals lifted params with new bias", r.passed && max_abs_diff(&stepped.weights.concat(), &expect.weights.concat()) <= 1e-12 && stepped.bias == 0.02));
    out.push(("init check at identity passes", check_init_invariance(ModelKind::Lcn, shape, 0.1, &id, 500, 0.01, 33)?.passed));
    let risk = check_risk_invariance(&TwoPhase(ModelKind::Cnn), &spec, &id, 6, 10, 50, 0.01, 34)?;
    out.push(("risk check at identity is bitwise equal", risk.risks_base == risk.risks_transformed));
    Ok(out)
}

fn experiments() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let quiet = TaskSpec::with_random_signal(PatchShape::new(3, 4)?, 1e-12, 40)?;
    out.push(("oracle loss at σ→0 ≤ 1e-6", optimal_loss(&quiet, 10_000, &mut seeded(41))?.value <= 1e-6));
    let exact = TaskSpec::with_random_signal(PatchShape::new(3, 4)?, 1e-300, 40)?;
    let w = ModelParams::cnn(exact.shape, exact.signal.clone(), 0.0)?;
    out.push(("w = w*, b = 0 at σ→0 has zero loss", empirical_loss(&w, &sample_dsd(&exact, 100, 42)?.samples)? <= 1e-30));

    let tiny = SweepConfig {
        kinds: vec![ModelKind::Cnn],
        k_values: vec![3],
        d_values: vec![4],
        sample_sizes: vec![10],
        replicates: 1,
        sigma: NoiseLevel::Fixed(0.2),
        grid: GridSettings { iterations: 10, test_size: 100, ..GridSettings::default() },
        master_seed: 43,
    };
    let r = run_test_error_sweep(&tiny)?;
    out.push(("one-cell sweep has one row", r.rows.len() == 1));
    let two = SweepConfig { replicates: 2, ..tiny.clone() };
    out.push(("sweep rows deterministic", run_test_error_sweep(&two)? == run_test_error_sweep(&two)?));

    let step = |n: usize, _: u64| -> Result<f64> { Ok(if n < 137 { 1.0 } else { 0.0 }) };
    out.push(("binary search finds 137", binary_search_min_n(&step, 0.5, 1000, 0)?.min_n == 137));
    let never = |n: usize, _: u64| -> Result<f64> { Ok(if n < 1001 { 1.0 } else { 0.0 }) };
    out.push(("binary search saturates", binary_search_min_n(&never, 0.5, 1000, 0)?.saturated));

    let dir = tempfile::tempdir()?;
    let empty = SweepReport { config: tiny.clone(), rows: vec![], failures: vec![], cells: vec![] };
    emit_sweep_report(&empty, dir.path(), std::time::Duration::ZERO)?;
    let header_only = std::fs::read_to_string(dir.path().join("sweep.csv"))?.lines().count() == 1;
    out.push(("empty results: header-only CSV, no plot", header_only && render_sweep_plots(&empty, dir.path())?.is_empty()));
    emit_sweep_report(&two_report(&two)?, dir.path(), std::time::Duration::ZERO)?;
    let back = read_sweep_csv(&dir.path().join("sweep.csv"))?;
    out.push(("CSV round trip keeps aggregates", aggregate_sweep_rows(&back) == two_report(&two)?.cells));

    let spec = TaskSpec::with_random_signal(PatchShape::new(3, 4)?, 0.05, 44)?;
    let oracle = run_boosting_demo_with(&spec, 4, 5, 45, |spec, _, _| {
        let mut w = vec![vec![0.0; spec.dim()]; spec.shape.k];
        w[0] = mu_vector(spec, 0)?;
        ModelParams::new(ModelKind::Fcn, spec.shape, w, 1e-3)
    })?;
    out.push(("boosting oracle sections gives alignment 1", (oracle.boosted_alignment - 1.0).abs() < 1e-12));
    let failed = run_boosting_demo_with(&spec, 4, 5, 46, |spec, _, _| Ok(ModelParams::zeros(ModelKind::Fcn, spec.shape)))?;
    let mut e1 = vec![0.0; spec.dim()];
    e1[0] = 1.0;
    out.push(("boosting with no identification returns e₁", failed.boosted == e1 && failed.boosted_alignment == mu_vector(&spec, 0)?[0]));
    Ok(out)
}

fn two_report(cfg: &SweepConfig) -> Result<SweepReport> {
    run_test_error_sweep(cfg)
}

pub fn run_all() -> Result<Vec<Check>> {
    let mut all = Vec::new();
    for part in [patchspace, datagen, models, training, theory, equivariance, experiments] {
        all.extend(part()?);
    }
    Ok(all)
}

#[allow(dead_code)]
fn unused(_: Dataset) {}
