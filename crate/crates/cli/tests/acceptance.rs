//! Acceptance suite: ten end-to-end checks of the full pipeline, from the
//! closed-form divergence oracles up to complete multi-problem benchmark
//! runs. Each check prints one `ACCEPTANCE <n>: PASS|FAIL` line (visible
//! with `--nocapture`) and then asserts.

use std::fs;
use std::process::Command;

use nalgebra::DMatrix;
use robust_belief::divergence::{analytic_divergence_discrete, kl_divergence_discrete};
use robust_belief::stats::{poisson_log_pmf, ModelFamily};
use robust_belief::{
    belief_from_losses, decision_function, estimate_log_ratio, fit_logistic, generative_belief,
    jsd, lml_and_gradient, run_experiment, simulate_true, total_variation, true_belief, BeliefGrid,
    BoConfig, DivergenceSpec, ExperimentConfig, FitMethod, GenerativeMode, GenerativeModel,
    GpModel, KernelConfig, Method, ParamGrid, ProblemSpec, ResultTable, RngStream, JSD_BOUND,
};

// Tolerances, pinned.
const TOL_GENERATOR_AT_ONE: f64 = 1e-12;
const TOL_SELF_DIVERGENCE: f64 = 1e-8;
const TOL_ALPHA_HELLINGER_REL: f64 = 1e-8;
const TOL_ALPHA_KL_REL: f64 = 1e-2;
const TOL_G_CANCELLATION_TV: f64 = 1e-8;
const MAX_WELLSPEC_GRID_KL_JSD: f64 = 0.02;
const MAX_MISSPEC_GRID_KL_JSD: f64 = 0.01;
const TOL_GP_INTERPOLATION: f64 = 1e-6;
const TOL_GP_GRADIENT_REL: f64 = 1e-4;
const TOL_GP_VARIANCE_MONOTONE: f64 = 1e-8;
const MAX_CALIBRATION_MEAN_ABS_LOG_RATIO: f64 = 0.2;
const TOL_LABEL_SWAP: f64 = 1e-6;
const TOL_JSD_SYMMETRY: f64 = 1e-12;
const TOL_JSD_DISJOINT: f64 = 1e-9;
const TOL_JSD_RANGE: f64 = 1e-9;

/// Print the verdict line, then panic with the collected diagnostics if any
/// sub-check failed.
fn report(number: u8, failures: &[String]) {
    let ok = failures.is_empty();
    println!("ACCEPTANCE {number}: {}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {number} failed:\n{}", failures.join("\n"));
}

/// Record a named sub-check.
fn check(failures: &mut Vec<String>, ok: bool, detail: String) {
    if !ok {
        failures.push(detail);
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn acceptance_01_analytic_divergence_oracles() {
    let mut failures = Vec::new();
    let specs = vec![
        DivergenceSpec::kl(),
        DivergenceSpec::sq_hellinger(),
        DivergenceSpec::tvd(),
        DivergenceSpec::alpha(0.5).unwrap(),
        DivergenceSpec::alpha(0.999).unwrap(),
    ];
    for d in &specs {
        let f1 = d.generator(0.0);
        check(
            &mut failures,
            f1.abs() <= TOL_GENERATOR_AT_ONE,
            format!("generator of {} at equal densities: {f1}", d.name()),
        );
    }

    let p3 = |k: u64| poisson_log_pmf(3.0, k as f64);
    let p2 = |k: u64| poisson_log_pmf(2.0, k as f64);
    for d in &specs {
        let self_div = analytic_divergence_discrete(d, p3, p3).unwrap();
        check(
            &mut failures,
            self_div.abs() <= TOL_SELF_DIVERGENCE,
            format!("self-divergence of {}: {self_div}", d.name()),
        );
    }

    let alpha_half =
        analytic_divergence_discrete(&DivergenceSpec::alpha(0.5).unwrap(), p3, p2).unwrap();
    let hellinger = analytic_divergence_discrete(&DivergenceSpec::sq_hellinger(), p3, p2).unwrap();
    check(
        &mut failures,
        rel_err(alpha_half, 4.0 * hellinger) <= TOL_ALPHA_HELLINGER_REL,
        format!(
            "alpha(0.5) = {alpha_half} vs 4 x squared Hellinger = {}",
            4.0 * hellinger
        ),
    );

    let alpha_near_one =
        analytic_divergence_discrete(&DivergenceSpec::alpha(0.999).unwrap(), p3, p2).unwrap();
    let closed_form_kl = 3.0 * 1.5f64.ln() - 1.0;
    let numeric_kl = kl_divergence_discrete(p3, p2).unwrap();
    check(
        &mut failures,
        rel_err(numeric_kl, closed_form_kl) <= 1e-9,
        format!("numeric KL {numeric_kl} vs closed form {closed_form_kl}"),
    );
    check(
        &mut failures,
        rel_err(alpha_near_one, closed_form_kl) <= TOL_ALPHA_KL_REL,
        format!("alpha(0.999) = {alpha_near_one} vs KL limit {closed_form_kl}"),
    );

    let tvd = analytic_divergence_discrete(&DivergenceSpec::tvd(), p3, p2).unwrap();
    let p8 = |k: u64| poisson_log_pmf(50.0, k as f64);
    let tvd_far = analytic_divergence_discrete(&DivergenceSpec::tvd(), p3, p8).unwrap();
    for (name, v) in [("near", tvd), ("far", tvd_far)] {
        check(
            &mut failures,
            (0.0..=2.0).contains(&v),
            format!("total variation ({name}) out of range: {v}"),
        );
    }
    check(
        &mut failures,
        tvd_far > tvd,
        format!("tvd not increasing with separation: {tvd} vs {tvd_far}"),
    );

    report(1, &failures);
}

#[test]
fn acceptance_02_reference_density_cancels_in_exact_kl() {
    let mut failures = Vec::new();
    let spec = ProblemSpec::by_label("poisson_wellspec").unwrap();
    let rng = RngStream::from_seed(7);
    let x = simulate_true(&spec, 90, &mut rng.child("observe"));
    let div = DivergenceSpec::kl().unstabilized();
    let bo = BoConfig::default();

    let kde = GenerativeModel::fit(&spec, &x, false).unwrap();
    let (b_kde, _) = generative_belief(
        &spec,
        &div,
        &x,
        &kde,
        GenerativeMode::Grid,
        &bo,
        1.0,
        &mut rng.child("kde"),
    )
    .unwrap();
    let (b_const, _) = generative_belief(
        &spec,
        &div,
        &x,
        &GenerativeModel::Constant(0.7),
        GenerativeMode::Grid,
        &bo,
        1.0,
        &mut rng.child("const"),
    )
    .unwrap();
    let tv = total_variation(&b_kde, &b_const).unwrap();
    check(
        &mut failures,
        tv < TOL_G_CANCELLATION_TV,
        format!("beliefs under different reference densities differ: TV = {tv:e}"),
    );

    // Hand-built grid posterior: exponentiated log-likelihood, quadrature
    // normalized, uniform prior.
    let grid = ParamGrid::from_spec(&spec);
    let weights = grid.quadrature_weights();
    let loglik: Vec<f64> = (0..grid.len())
        .map(|i| {
            robust_belief::log_densities_model(&spec, &grid.point(i), &x)
                .unwrap()
                .iter()
                .sum()
        })
        .collect();
    let max = loglik.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut density: Vec<f64> = loglik.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = density.iter().zip(&weights).map(|(d, w)| d * w).sum();
    for d in &mut density {
        *d /= total;
    }
    let tv_posterior: f64 = 0.5
        * b_kde
            .density
            .iter()
            .zip(&density)
            .zip(&weights)
            .map(|((a, b), w)| (a - b).abs() * w)
            .sum::<f64>();
    check(
        &mut failures,
        tv_posterior < TOL_G_CANCELLATION_TV,
        format!("exact-loss belief differs from likelihood posterior: TV = {tv_posterior:e}"),
    );

    report(2, &failures);
}

#[test]
fn acceptance_03_grid_kl_update_tracks_reference() {
    let mut failures = Vec::new();
    for (label, bound) in [
        ("poisson_wellspec", MAX_WELLSPEC_GRID_KL_JSD),
        ("poisson_misspec", MAX_MISSPEC_GRID_KL_JSD),
    ] {
        let mut config = ExperimentConfig::new(ProblemSpec::by_label(label).unwrap());
        config.divergences = vec![DivergenceSpec::kl()];
        config.methods = vec![Method::GenerativeGrid];
        config.seeds = (0..10).collect();
        let table = run_experiment(&config).unwrap();
        let row = table.row("kl", "generative_grid").unwrap();
        check(
            &mut failures,
            row.jsds().len() == 10,
            format!("{label}: {} of 10 seeds succeeded", row.jsds().len()),
        );
        let mean = row.mean_jsd().unwrap_or(f64::INFINITY);
        check(
            &mut failures,
            mean <= bound,
            format!("{label}: mean distance {mean} above {bound}"),
        );
    }
    report(3, &failures);
}

fn mean_of(table: &ResultTable, divergence: &str, method: &str) -> f64 {
    table
        .row(divergence, method)
        .and_then(|r| r.mean_jsd())
        .unwrap_or(f64::INFINITY)
}

#[test]
fn acceptance_04_method_ordering_on_wellspec_poisson() {
    let mut failures = Vec::new();
    let mut config = ExperimentConfig::new(ProblemSpec::by_label("poisson_wellspec").unwrap());
    config.divergences = vec![
        DivergenceSpec::tvd(),
        DivergenceSpec::sq_hellinger(),
        DivergenceSpec::kl(),
    ];
    config.seeds = (0..10).collect();
    let table = run_experiment(&config).unwrap();
    for (process, divergence, seed, message) in table.failed_cells() {
        failures.push(format!(
            "failed cell {process}/{divergence}/seed {seed}: {message}"
        ));
    }

    let classifiers = ["classifier_cv", "classifier_eb", "classifier_vb"];
    for divergence in ["tvd", "sq_hellinger"] {
        let bayesopt = mean_of(&table, divergence, "generative_bayesopt");
        for classifier in classifiers {
            let m = mean_of(&table, divergence, classifier);
            check(
                &mut failures,
                m < bayesopt,
                format!("{divergence}: {classifier} mean {m:.4} not below generative_bayesopt {bayesopt:.4}"),
            );
        }
    }
    let grid_kl = mean_of(&table, "kl", "generative_grid");
    for classifier in classifiers {
        let m = mean_of(&table, "kl", classifier);
        check(
            &mut failures,
            grid_kl < m,
            format!("kl: generative_grid mean {grid_kl:.4} not below {classifier} {m:.4}"),
        );
    }
    report(4, &failures);
}

#[test]
fn acceptance_05_alpha_updates_approach_kl_monotonically() {
    let mut failures = Vec::new();
    let spec = ProblemSpec::by_label("poisson_misspec").unwrap();
    let rng = RngStream::from_seed(11);
    let x = simulate_true(&spec, 90, &mut rng.child("observe"));
    let reference = true_belief(&spec, &DivergenceSpec::kl().unstabilized(), &x, 1.0).unwrap();
    let mut previous = f64::INFINITY;
    for tenth in [5, 6, 7, 8, 9] {
        let alpha = tenth as f64 / 10.0;
        let d = DivergenceSpec::alpha(alpha).unwrap().unstabilized();
        let belief = true_belief(&spec, &d, &x, 1.0).unwrap();
        let distance = jsd(&belief, &reference).unwrap();
        check(
            &mut failures,
            distance < previous,
            format!(
                "distance to the exact-KL belief rose at alpha = {alpha}: {distance} >= {previous}"
            ),
        );
        previous = distance;
    }
    report(5, &failures);
}

fn gp_training_set() -> (DMatrix<f64>, Vec<f64>) {
    let n = 14;
    let inputs = DMatrix::from_fn(n, 2, |i, j| {
        let t = i as f64 / (n - 1) as f64;
        if j == 0 {
            t * 4.0 - 2.0
        } else {
            (t * 11.0).sin() * 1.5
        }
    });
    let targets: Vec<f64> = (0..n)
        .map(|i| {
            let a = inputs[(i, 0)];
            let b = inputs[(i, 1)];
            (a * 1.3).sin() + 0.4 * b - 0.1 * a * b
        })
        .collect();
    (inputs, targets)
}

#[test]
fn acceptance_06_surrogate_interpolation_gradients_and_variance() {
    let mut failures = Vec::new();
    let (inputs, targets) = gp_training_set();

    // Noiseless interpolation
    let interp_config = KernelConfig {
        matern_lengthscales: vec![1.5, 1.0],
        matern_variance: 1.0,
        constant_variance: 0.5,
        noise_variance: 0.0,
    };
    let gp = GpModel::from_config(inputs.clone(), targets.clone(), interp_config).unwrap();
    let worst = (0..inputs.nrows())
        .map(|i| {
            let x: Vec<f64> = inputs.row(i).iter().copied().collect();
            (gp.predict(&x).0 - targets[i]).abs()
        })
        .fold(0.0, f64::max);
    check(
        &mut failures,
        worst <= TOL_GP_INTERPOLATION,
        format!("noiseless surrogate misses its training targets by {worst:e}"),
    );

    // Analytic likelihood gradient vs central finite differences in
    // log-hyperparameter space.
    let config = KernelConfig {
        matern_lengthscales: vec![0.8, 1.7],
        matern_variance: 0.9,
        constant_variance: 0.3,
        noise_variance: 0.1,
    };
    let (_, grad) = lml_and_gradient(&inputs, &targets, &config).unwrap();
    let bump = |k: usize, h: f64| -> KernelConfig {
        let mut c = config.clone();
        match k {
            0 | 1 => c.matern_lengthscales[k] *= h.exp(),
            2 => c.matern_variance *= h.exp(),
            3 => c.constant_variance *= h.exp(),
            _ => c.noise_variance *= h.exp(),
        }
        c
    };
    let h = 1e-5;
    for (k, g) in grad.iter().enumerate() {
        let up = lml_and_gradient(&inputs, &targets, &bump(k, h)).unwrap().0;
        let down = lml_and_gradient(&inputs, &targets, &bump(k, -h)).unwrap().0;
        let fd = (up - down) / (2.0 * h);
        let rel = (g - fd).abs() / fd.abs().max(1e-6);
        check(
            &mut failures,
            rel <= TOL_GP_GRADIENT_REL,
            format!("gradient coordinate {k}: analytic {g} vs finite difference {fd}"),
        );
    }

    // Predictive variance shrinks pointwise as training data accumulates.
    let var_config = KernelConfig {
        matern_lengthscales: vec![1.5, 1.0],
        matern_variance: 1.0,
        constant_variance: 0.5,
        noise_variance: 0.05,
    };
    let test_points: Vec<Vec<f64>> = (0..7)
        .map(|i| vec![-1.9 + i as f64 * 0.6, (i as f64 * 0.9).cos()])
        .collect();
    for n in 3..inputs.nrows() {
        let smaller = GpModel::from_config(
            inputs.rows(0, n).into_owned(),
            targets[..n].to_vec(),
            var_config.clone(),
        )
        .unwrap();
        let larger = GpModel::from_config(
            inputs.rows(0, n + 1).into_owned(),
            targets[..n + 1].to_vec(),
            var_config.clone(),
        )
        .unwrap();
        for point in &test_points {
            let before = smaller.predict(point).1;
            let after = larger.predict(point).1;
            check(
                &mut failures,
                after <= before + TOL_GP_VARIANCE_MONOTONE,
                format!("variance grew from {before} to {after} at {point:?} (n = {n})"),
            );
        }
    }
    report(6, &failures);
}

#[test]
fn acceptance_07_classifier_calibration_and_antisymmetry() {
    let mut failures = Vec::new();
    let spec = ProblemSpec::by_label("poisson_wellspec").unwrap();
    // At the true parameter the simulated and observed samples share one
    // distribution, so the estimated mean log ratio should sit near zero.
    for method in [FitMethod::Cv, FitMethod::Eb, FitMethod::Vb] {
        let mut total = 0.0;
        for seed in 0..20 {
            let rng = RngStream::from_seed(1000 + seed);
            let x = simulate_true(&spec, 90, &mut rng.child("observe"));
            let estimate =
                estimate_log_ratio(&spec, &[3.0], &x, method, 10, &mut rng.child("ratio")).unwrap();
            total += estimate.mean_log_ratio.abs();
        }
        let mean_abs = total / 20.0;
        check(
            &mut failures,
            mean_abs <= MAX_CALIBRATION_MEAN_ABS_LOG_RATIO,
            format!("{method:?}: mean |log ratio| under the null = {mean_abs}"),
        );
    }

    // Swapping labels must negate every decision value for the two
    // deterministic fits.
    let rows = 60;
    let features = DMatrix::from_fn(rows, 3, |i, j| match j {
        0 => 1.0,
        1 => (i as f64 * 1.3).sin() * 2.0 + if i % 2 == 0 { 0.5 } else { -0.5 },
        _ => (i as f64 * 0.7).cos(),
    });
    let labels: Vec<bool> = (0..rows).map(|i| i % 2 == 0).collect();
    let swapped: Vec<bool> = labels.iter().map(|l| !l).collect();
    for method in [FitMethod::Eb, FitMethod::Vb] {
        let mut rng = RngStream::from_seed(2);
        let direct = fit_logistic(&features, &labels, method, &mut rng).unwrap();
        let mut rng = RngStream::from_seed(2);
        let flipped = fit_logistic(&features, &swapped, method, &mut rng).unwrap();
        let a = decision_function(&direct, &features);
        let b = decision_function(&flipped, &features);
        let worst = a
            .iter()
            .zip(&b)
            .map(|(u, v)| (u + v).abs())
            .fold(0.0, f64::max);
        check(
            &mut failures,
            worst <= TOL_LABEL_SWAP,
            format!("{method:?}: label swap asymmetry {worst:e}"),
        );
    }
    report(7, &failures);
}

/// Belief concentrated on one of the two cells of a shared grid.
fn two_point_mass(on_second: bool) -> BeliefGrid {
    let grid = ParamGrid {
        axes: vec![vec![0.0, 1.0]],
    };
    let losses = if on_second {
        vec![1e6, 0.0]
    } else {
        vec![0.0, 1e6]
    };
    belief_from_losses(&grid, losses, 1, None, 1.0).unwrap()
}

#[test]
fn acceptance_08_belief_distance_properties() {
    let mut failures = Vec::new();
    let spec = ProblemSpec::by_label("poisson_wellspec").unwrap();
    let rng = RngStream::from_seed(3);
    let x = simulate_true(&spec, 60, &mut rng.child("observe"));
    let p = true_belief(&spec, &DivergenceSpec::kl().unstabilized(), &x, 1.0).unwrap();
    let q = true_belief(&spec, &DivergenceSpec::tvd().unstabilized(), &x, 1.0).unwrap();

    let self_distance = jsd(&p, &p).unwrap();
    check(
        &mut failures,
        self_distance == 0.0,
        format!("distance of a belief to itself: {self_distance:e}"),
    );
    let pq = jsd(&p, &q).unwrap();
    let qp = jsd(&q, &p).unwrap();
    check(
        &mut failures,
        (pq - qp).abs() <= TOL_JSD_SYMMETRY,
        format!("asymmetry: {pq} vs {qp}"),
    );

    let a = two_point_mass(false);
    let b = two_point_mass(true);
    let disjoint = jsd(&a, &b).unwrap();
    check(
        &mut failures,
        (disjoint - JSD_BOUND).abs() <= TOL_JSD_DISJOINT,
        format!("disjoint-support distance {disjoint} vs bound {JSD_BOUND}"),
    );
    report(8, &failures);
}

#[test]
fn acceptance_09_benchmark_runs_are_reproducible() {
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("desk.toml");
    fs::write(
        &config_path,
        "problem = \"poisson_wellspec\"\n\
         n_obs = 30\n\
         folds = 5\n\
         seeds = [0, 1]\n\
         divergences = [\"kl\", \"tvd\", \"alpha_0.5\"]\n\
         bayesopt.n_init = 4\n\
         bayesopt.n_total = 12\n\
         bayesopt.candidates = 128\n",
    )
    .unwrap();
    let mut tables = Vec::new();
    for sub in ["first", "second"] {
        let out_dir = dir.path().join(sub);
        let output = Command::new(env!("CARGO_BIN_EXE_robust-belief"))
            .args(["run", "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        check(
            &mut failures,
            output.status.success(),
            format!(
                "run into {sub} failed: {}",
                String::from_utf8_lossy(&output.stderr)
            ),
        );
        tables.push(fs::read(out_dir.join("results.csv")).unwrap_or_default());
    }
    check(
        &mut failures,
        !tables[0].is_empty() && tables[0] == tables[1],
        "result tables of identical runs differ".into(),
    );
    report(9, &failures);
}

#[test]
fn acceptance_10_location_scale_and_regression_problems_complete() {
    let mut failures = Vec::new();
    for label in [
        "gaussian_wellspec",
        "gaussian_misspec",
        "regression_wellspec",
        "regression_misspec",
    ] {
        let mut problem = ProblemSpec::by_label(label).unwrap();
        if problem.family == ModelFamily::Regression {
            problem.grid_sizes = vec![21, 21, 21];
        }
        let mut config = ExperimentConfig::new(problem);
        config.seeds = (0..5).collect();
        config.bo.n_total = 60;
        let table = run_experiment(&config).unwrap();
        for (process, divergence, seed, message) in table.failed_cells() {
            failures.push(format!("{process}/{divergence}/seed {seed}: {message}"));
        }
        for row in &table.rows {
            for (seed, cell) in &row.cells {
                if let Ok(v) = cell {
                    check(
                        &mut failures,
                        (-TOL_JSD_RANGE..=JSD_BOUND + TOL_JSD_RANGE).contains(v),
                        format!(
                            "{label}/{}/{} seed {seed}: distance {v} outside [0, {JSD_BOUND}]",
                            row.divergence, row.method
                        ),
                    );
                }
            }
        }
    }
    report(10, &failures);
}
