//! Seed-replicated benchmark: every estimation method against the exact
//! reference belief, scored by Jensen–Shannon distance and aggregated into
//! a result table.

use crate::bayesopt::{run_bayesopt, AcquisitionTrace, BoConfig};
use crate::belief::{generative_belief, surrogate_belief, true_belief, BeliefGrid, GenerativeMode};
use crate::classifier::{estimate_log_ratio, FitMethod};
use crate::density::{generative_log_ratio, GenerativeModel};
use crate::divergence::DivergenceSpec;
use crate::rng::RngStream;
use crate::stats::{simulate_true, Dataset, ProblemSpec};
use crate::{Error, Result};
use rayon::prelude::*;
use std::collections::HashSet;

/// Largest possible Jensen–Shannon distance, `sqrt(ln 2)`.
pub const JSD_BOUND: f64 = 0.8325546111576977;

/// Jensen–Shannon distance between two beliefs on the same grid:
/// `sqrt(0.5 KL(p||m) + 0.5 KL(q||m))` with `m` the pointwise mixture,
/// integrated with the grid's quadrature weights and `0 log 0 = 0`.
pub fn jsd(p: &BeliefGrid, q: &BeliefGrid) -> Result<f64> {
    if p.grid != q.grid {
        return Err(Error::GridMismatch(
            "beliefs live on different grids".into(),
        ));
    }
    let w = p.grid.quadrature_weights();
    let mut acc = 0.0;
    for i in 0..p.density.len() {
        let pi = p.density[i];
        let qi = q.density[i];
        let mi = 0.5 * (pi + qi);
        let mut term = 0.0;
        if pi > 0.0 {
            term += 0.5 * pi * (pi / mi).ln();
        }
        if qi > 0.0 {
            term += 0.5 * qi * (qi / mi).ln();
        }
        acc += term * w[i];
    }
    Ok(acc.max(0.0).sqrt())
}

/// A belief-construction method under benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Classifier ratios, penalty chosen by cross-validation.
    ClassifierCv,
    /// Classifier ratios, prior precision by evidence maximization.
    ClassifierEb,
    /// Classifier ratios, variational posterior-mean weights.
    ClassifierVb,
    /// Fitted data-density ratios searched by the acquisition loop.
    GenerativeBayesOpt,
    /// Fitted data-density ratios evaluated at every grid point.
    GenerativeGrid,
}

impl Method {
    pub fn all() -> Vec<Method> {
        vec![
            Method::ClassifierCv,
            Method::ClassifierEb,
            Method::ClassifierVb,
            Method::GenerativeBayesOpt,
            Method::GenerativeGrid,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::ClassifierCv => "classifier_cv",
            Method::ClassifierEb => "classifier_eb",
            Method::ClassifierVb => "classifier_vb",
            Method::GenerativeBayesOpt => "generative_bayesopt",
            Method::GenerativeGrid => "generative_grid",
        }
    }

    pub fn by_name(name: &str) -> Result<Method> {
        Method::all()
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown method '{name}'; expected one of classifier_cv, \
                     classifier_eb, classifier_vb, generative_bayesopt, generative_grid"
                ))
            })
    }

    /// The classifier fit behind the method, when there is one.
    pub fn classifier_fit(&self) -> Option<FitMethod> {
        match self {
            Method::ClassifierCv => Some(FitMethod::Cv),
            Method::ClassifierEb => Some(FitMethod::Eb),
            Method::ClassifierVb => Some(FitMethod::Vb),
            _ => None,
        }
    }

    /// Whether the method smooths an acquisition trace (and so produces one).
    pub fn uses_trace(&self) -> bool {
        !matches!(self, Method::GenerativeGrid)
    }
}

/// Full description of one benchmark run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub divergences: Vec<DivergenceSpec>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    /// Observations drawn from the true process per seed.
    pub n_obs: usize,
    /// Cross-fitting folds for the classifier ratio estimates.
    pub folds: usize,
    pub bo: BoConfig,
    /// Learning-rate weight on the loss in the belief update.
    pub tempering: f64,
    /// Rebuild the acquisition trace for every divergence instead of
    /// sharing one trace per (seed, method). The ratio estimates are
    /// divergence-independent, so sharing is the default.
    pub rebuild_trace_per_divergence: bool,
    /// Renormalize count-data density fits over the integer lattice.
    pub lattice_normalize_kde: bool,
}

impl ExperimentConfig {
    /// Benchmark defaults: the full divergence and method sets, 50 seeds,
    /// 90 observations, 10 folds.
    pub fn new(problem: ProblemSpec) -> ExperimentConfig {
        ExperimentConfig {
            problem,
            divergences: DivergenceSpec::standard_set(),
            methods: Method::all(),
            seeds: (0..50).collect(),
            n_obs: 90,
            folds: 10,
            bo: BoConfig::default(),
            tempering: 1.0,
            rebuild_trace_per_divergence: false,
            lattice_normalize_kde: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.divergences.is_empty() {
            return Err(Error::InvalidConfig("no divergences configured".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods configured".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("no seeds configured".into()));
        }
        if self.seeds.iter().collect::<HashSet<_>>().len() != self.seeds.len() {
            return Err(Error::InvalidConfig("seeds must be distinct".into()));
        }
        let mut names = HashSet::new();
        for m in &self.methods {
            if !names.insert(m.name()) {
                return Err(Error::InvalidConfig(format!(
                    "method '{}' listed twice",
                    m.name()
                )));
            }
        }
        let mut names = HashSet::new();
        for d in &self.divergences {
            d.validate()?;
            if !names.insert(d.name()) {
                return Err(Error::InvalidConfig(format!(
                    "divergence '{}' listed twice",
                    d.name()
                )));
            }
        }
        if self.n_obs == 0 {
            return Err(Error::InvalidConfig("n_obs must be positive".into()));
        }
        if !self.tempering.is_finite() || self.tempering <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tempering weight must be positive and finite, got {}",
                self.tempering
            )));
        }
        self.bo.validate()
    }
}

/// Callbacks for streaming run artifacts (belief grids, traces) as they are
/// produced. All hooks default to no-ops.
pub trait RunObserver {
    fn on_true_belief(&mut self, _seed: u64, _divergence: &DivergenceSpec, _belief: &BeliefGrid) {}
    fn on_trace(&mut self, _seed: u64, _method: Method, _trace: &AcquisitionTrace) {}
    fn on_belief(
        &mut self,
        _seed: u64,
        _divergence: &DivergenceSpec,
        _method: Method,
        _belief: &BeliefGrid,
    ) {
    }
}

/// Observer that drops everything.
pub struct NullObserver;

impl RunObserver for NullObserver {}

/// One (divergence, method, seed) cell: the distance to the reference
/// belief, or the cause of failure.
#[derive(Clone, Debug)]
pub struct CellOutcome {
    pub seed: u64,
    pub divergence: String,
    pub method: String,
    pub result: std::result::Result<f64, String>,
}

/// Aggregated outcomes for one (true process, divergence, method) row.
#[derive(Clone, Debug)]
pub struct ResultRow {
    pub true_process: String,
    pub divergence: String,
    pub method: String,
    /// Per-seed outcome in configured seed order.
    pub cells: Vec<(u64, std::result::Result<f64, String>)>,
}

impl ResultRow {
    pub fn jsds(&self) -> Vec<f64> {
        self.cells
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok().copied())
            .collect()
    }

    pub fn mean_jsd(&self) -> Option<f64> {
        let v = self.jsds();
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    }

    pub fn failures(&self) -> Vec<(u64, &str)> {
        self.cells
            .iter()
            .filter_map(|(s, r)| r.as_ref().err().map(|e| (*s, e.as_str())))
            .collect()
    }
}

/// All rows of one run, sorted by (true process, divergence, method).
#[derive(Clone, Debug)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn row(&self, divergence: &str, method: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.divergence == divergence && r.method == method)
    }

    /// Every failed cell as (divergence, method, seed, cause).
    pub fn failed_cells(&self) -> Vec<(String, String, u64, String)> {
        let mut out = Vec::new();
        for row in &self.rows {
            for (seed, cause) in row.failures() {
                out.push((
                    row.divergence.clone(),
                    row.method.clone(),
                    seed,
                    cause.to_string(),
                ));
            }
        }
        out
    }

    /// CSV with one row per (true process, divergence, method): the mean
    /// distance, the count of successful seeds, and the per-seed values as
    /// a quoted comma-separated list (failures as NA).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true_process,divergence,method,mean_jsd,n_seeds,seed_jsds\n");
        for row in &self.rows {
            let mean = row
                .mean_jsd()
                .map_or_else(|| "NA".to_string(), |m| format!("{m:.9e}"));
            let list: Vec<String> = row
                .cells
                .iter()
                .map(|(_, r)| match r {
                    Ok(j) => format!("{j:.9e}"),
                    Err(_) => "NA".to_string(),
                })
                .collect();
            out.push_str(&format!(
                "{},{},{},{},{},\"{}\"\n",
                row.true_process,
                row.divergence,
                row.method,
                mean,
                row.jsds().len(),
                list.join(",")
            ));
        }
        out
    }
}

/// Acquisition trace for one (seed, method) arm: the classifier methods
/// evaluate cross-fitted ratio estimates, the generative arm evaluates the
/// fitted-density ratio. `x_obs` stays fixed; only the parameter moves.
fn build_trace(
    config: &ExperimentConfig,
    x_obs: &Dataset,
    method: Method,
    g: Option<&GenerativeModel>,
    rng: &mut RngStream,
) -> Result<AcquisitionTrace> {
    let spec = &config.problem;
    match method.classifier_fit() {
        Some(fit) => run_bayesopt(
            |theta, eval_rng| {
                estimate_log_ratio(spec, theta, x_obs, fit, config.folds, eval_rng)
                    .map(|r| r.per_point_log_ratios)
            },
            &spec.param_bounds,
            config.bo,
            rng,
        ),
        None => {
            let g = g.expect("generative model fitted before generative methods run");
            run_bayesopt(
                |theta, _| generative_log_ratio(spec, theta, g, x_obs),
                &spec.param_bounds,
                config.bo,
                rng,
            )
        }
    }
}

/// Everything for one seed: simulate, build references, run every method,
/// score every (divergence, method) cell. Failures become recorded causes,
/// never panics or early exits.
fn run_seed(
    config: &ExperimentConfig,
    seed: u64,
    observer: &mut dyn RunObserver,
) -> Vec<CellOutcome> {
    let spec = &config.problem;
    let root = RngStream::from_seed(seed);
    let x_obs = simulate_true(spec, config.n_obs, &mut root.child("observe"));

    // Reference beliefs use exact densities, so they carry no
    // stabilization truncation.
    let references: Vec<std::result::Result<BeliefGrid, String>> = config
        .divergences
        .iter()
        .map(|d| {
            true_belief(spec, &d.unstabilized(), &x_obs, config.tempering)
                .map_err(|e| format!("reference belief: {e}"))
        })
        .collect();
    for (d, r) in config.divergences.iter().zip(&references) {
        if let Ok(b) = r {
            observer.on_true_belief(seed, d, b);
        }
    }

    // One data-density fit shared by both generative arms.
    let needs_g = config.methods.iter().any(|m| m.classifier_fit().is_none());
    let g: Option<std::result::Result<GenerativeModel, String>> = if needs_g {
        Some(
            GenerativeModel::fit(spec, &x_obs, config.lattice_normalize_kde)
                .map_err(|e| format!("generative density fit: {e}")),
        )
    } else {
        None
    };

    let mut outcomes = Vec::new();
    let mut push = |div: &DivergenceSpec, method: Method, result| {
        outcomes.push(CellOutcome {
            seed,
            divergence: div.name(),
            method: method.name().to_string(),
            result,
        });
    };

    for &method in &config.methods {
        let g_for_method = if method.classifier_fit().is_none() {
            match g.as_ref().expect("fitted when needed") {
                Ok(m) => Some(m),
                Err(cause) => {
                    for div in &config.divergences {
                        push(div, method, Err(cause.clone()));
                    }
                    continue;
                }
            }
        } else {
            None
        };

        if method == Method::GenerativeGrid {
            // Exact model densities against the fitted reference: no
            // surrogate in the path, so no stabilization truncation.
            let g_model = g_for_method.expect("generative model present");
            for (div, reference) in config.divergences.iter().zip(&references) {
                let result = reference.clone().and_then(|r| {
                    generative_belief(
                        spec,
                        &div.unstabilized(),
                        &x_obs,
                        g_model,
                        GenerativeMode::Grid,
                        &config.bo,
                        config.tempering,
                        &mut root.child("method-generative_grid"),
                    )
                    .map_err(|e| e.to_string())
                    .and_then(|(belief, _)| {
                        observer.on_belief(seed, div, method, &belief);
                        jsd(&belief, &r).map_err(|e| e.to_string())
                    })
                });
                push(div, method, result);
            }
            continue;
        }

        // Trace-smoothing methods. The ratio estimates are divergence
        // independent, so one trace serves every divergence unless a
        // per-divergence rebuild was requested.
        let mut shared_trace: Option<std::result::Result<AcquisitionTrace, String>> = None;
        for (div, reference) in config.divergences.iter().zip(&references) {
            let trace = if config.rebuild_trace_per_divergence {
                let mut rng = root
                    .child(&format!("method-{}", method.name()))
                    .child(&format!("div-{}", div.name()));
                let t = build_trace(config, &x_obs, method, g_for_method, &mut rng)
                    .map_err(|e| e.to_string());
                if let Ok(t) = &t {
                    observer.on_trace(seed, method, t);
                }
                t
            } else {
                if shared_trace.is_none() {
                    let mut rng = root.child(&format!("method-{}", method.name()));
                    let t = build_trace(config, &x_obs, method, g_for_method, &mut rng)
                        .map_err(|e| e.to_string());
                    if let Ok(t) = &t {
                        observer.on_trace(seed, method, t);
                    }
                    shared_trace = Some(t);
                }
                shared_trace.as_ref().expect("just filled").clone()
            };
            let result = reference.clone().and_then(|r| {
                trace.and_then(|t| {
                    surrogate_belief(&t, div, spec, config.tempering)
                        .map_err(|e| e.to_string())
                        .and_then(|belief| {
                            observer.on_belief(seed, div, method, &belief);
                            jsd(&belief, &r).map_err(|e| e.to_string())
                        })
                })
            });
            push(div, method, result);
        }
    }
    outcomes
}

fn assemble(config: &ExperimentConfig, per_seed: Vec<Vec<CellOutcome>>) -> ResultTable {
    let label = config.problem.label.clone();
    let mut rows: Vec<ResultRow> = Vec::new();
    for div in &config.divergences {
        for method in &config.methods {
            rows.push(ResultRow {
                true_process: label.clone(),
                divergence: div.name(),
                method: method.name().to_string(),
                cells: Vec::new(),
            });
        }
    }
    for outcomes in per_seed {
        for cell in outcomes {
            let row = rows
                .iter_mut()
                .find(|r| r.divergence == cell.divergence && r.method == cell.method)
                .expect("every cell belongs to a configured row");
            row.cells.push((cell.seed, cell.result));
        }
    }
    rows.sort_by(|a, b| {
        (&a.true_process, &a.divergence, &a.method).cmp(&(
            &b.true_process,
            &b.divergence,
            &b.method,
        ))
    });
    ResultTable { rows }
}

/// Run the benchmark with seeds in parallel. Deterministic for a fixed
/// config: every seed derives its own randomness stream.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let per_seed: Vec<Vec<CellOutcome>> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, seed, &mut NullObserver))
        .collect();
    Ok(assemble(config, per_seed))
}

/// Sequential variant that streams artifacts through the observer.
pub fn run_experiment_observed(
    config: &ExperimentConfig,
    observer: &mut dyn RunObserver,
) -> Result<ResultTable> {
    config.validate()?;
    let per_seed: Vec<Vec<CellOutcome>> = config
        .seeds
        .iter()
        .map(|&seed| run_seed(config, seed, observer))
        .collect();
    Ok(assemble(config, per_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{belief_from_losses, ParamGrid};

    fn two_point_grid() -> ParamGrid {
        ParamGrid {
            axes: vec![vec![0.0, 1.0]],
        }
    }

    fn point_mass(at: usize) -> BeliefGrid {
        let mut losses = vec![f64::INFINITY; 2];
        losses[at] = 0.0;
        belief_from_losses(&two_point_grid(), losses, 10, None, 1.0).unwrap()
    }

    #[test]
    fn jsd_of_identical_beliefs_is_zero() {
        let p = point_mass(0);
        assert_eq!(jsd(&p, &p).unwrap(), 0.0);
        let q = belief_from_losses(&two_point_grid(), vec![0.1, 0.4], 10, None, 1.0).unwrap();
        assert!(jsd(&q, &q).unwrap() < 1e-15);
    }

    #[test]
    fn jsd_is_symmetric() {
        let p = belief_from_losses(&two_point_grid(), vec![0.1, 0.4], 10, None, 1.0).unwrap();
        let q = belief_from_losses(&two_point_grid(), vec![0.7, 0.2], 10, None, 1.0).unwrap();
        let a = jsd(&p, &q).unwrap();
        let b = jsd(&q, &p).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(a > 0.0);
    }

    #[test]
    fn disjoint_support_reaches_the_bound() {
        let p = point_mass(0);
        let q = point_mass(1);
        let d = jsd(&p, &q).unwrap();
        assert!((d - JSD_BOUND).abs() < 1e-9, "distance {d}");
        assert!((JSD_BOUND - (2.0f64.ln()).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let p = point_mass(0);
        let other = ParamGrid {
            axes: vec![vec![0.0, 2.0]],
        };
        let q = belief_from_losses(&other, vec![0.0, 0.0], 10, None, 1.0).unwrap();
        assert!(matches!(jsd(&p, &q), Err(Error::GridMismatch(_))));
    }

    fn tiny_config() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ProblemSpec::poisson_wellspec());
        c.divergences = vec![DivergenceSpec::kl(), DivergenceSpec::tvd()];
        c.methods = vec![Method::GenerativeGrid];
        c.seeds = vec![0, 1];
        c.n_obs = 30;
        c
    }

    #[test]
    fn grid_method_produces_full_table() {
        let table = run_experiment(&tiny_config()).unwrap();
        assert_eq!(table.rows.len(), 2);
        for row in &table.rows {
            assert_eq!(row.true_process, "poisson_wellspec");
            assert_eq!(row.cells.len(), 2);
            assert!(row.failures().is_empty(), "{:?}", row.failures());
            for j in row.jsds() {
                assert!((0.0..=JSD_BOUND + 1e-9).contains(&j), "jsd {j}");
            }
            assert!(row.mean_jsd().is_some());
        }
        let csv = table.to_csv();
        assert!(csv.starts_with("true_process,divergence,method,mean_jsd,n_seeds,seed_jsds\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn reruns_are_identical() {
        let config = tiny_config();
        let a = run_experiment(&config).unwrap().to_csv();
        let b = run_experiment(&config).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_kl_distance_is_small_when_wellspec() {
        // The fitted-density estimate at full-grid resolution should land
        // close to the exact reference on well-specified count data.
        let mut c = tiny_config();
        c.divergences = vec![DivergenceSpec::kl()];
        c.n_obs = 90;
        let table = run_experiment(&c).unwrap();
        let mean = table
            .row("kl", "generative_grid")
            .unwrap()
            .mean_jsd()
            .unwrap();
        assert!(mean < 0.05, "mean distance {mean}");
    }

    #[test]
    fn trace_methods_run_and_observer_sees_artifacts() {
        #[derive(Default)]
        struct Counter {
            true_beliefs: usize,
            traces: usize,
            beliefs: usize,
        }
        impl RunObserver for Counter {
            fn on_true_belief(&mut self, _: u64, _: &DivergenceSpec, _: &BeliefGrid) {
                self.true_beliefs += 1;
            }
            fn on_trace(&mut self, _: u64, _: Method, _: &AcquisitionTrace) {
                self.traces += 1;
            }
            fn on_belief(&mut self, _: u64, _: &DivergenceSpec, _: Method, _: &BeliefGrid) {
                self.beliefs += 1;
            }
        }

        let mut c = ExperimentConfig::new(ProblemSpec::poisson_wellspec());
        c.divergences = vec![DivergenceSpec::kl(), DivergenceSpec::sq_hellinger()];
        c.methods = vec![Method::ClassifierVb, Method::GenerativeBayesOpt];
        c.seeds = vec![3];
        c.n_obs = 30;
        c.folds = 5;
        c.bo = BoConfig {
            beta: 5.0,
            n_init: 4,
            n_total: 8,
            candidates: 64,
        };
        let mut counter = Counter::default();
        let table = run_experiment_observed(&c, &mut counter).unwrap();
        assert_eq!(counter.true_beliefs, 2);
        assert_eq!(counter.traces, 2, "one shared trace per method");
        assert_eq!(counter.beliefs, 4);
        assert_eq!(table.rows.len(), 4);
        for row in &table.rows {
            assert!(row.failures().is_empty(), "{:?}", row.failures());
            for j in row.jsds() {
                assert!((0.0..=JSD_BOUND + 1e-9).contains(&j), "jsd {j}");
            }
        }
    }

    #[test]
    fn cell_failures_are_recorded_and_run_continues() {
        // Folds that do not divide the observation count make every
        // classifier evaluation fail; the generative arm is unaffected.
        let mut c = ExperimentConfig::new(ProblemSpec::poisson_wellspec());
        c.divergences = vec![DivergenceSpec::kl()];
        c.methods = vec![Method::ClassifierVb, Method::GenerativeGrid];
        c.seeds = vec![0];
        c.n_obs = 30;
        c.folds = 7;
        let table = run_experiment(&c).unwrap();
        let failed = table.row("kl", "classifier_vb").unwrap();
        assert_eq!(failed.jsds().len(), 0);
        assert!(failed.failures()[0].1.contains("divisible"));
        assert!(failed.mean_jsd().is_none());
        let fine = table.row("kl", "generative_grid").unwrap();
        assert_eq!(fine.jsds().len(), 1);
        let csv = table.to_csv();
        assert!(csv.contains(",NA,0,\"NA\""));
        assert_eq!(table.failed_cells().len(), 1);
    }

    #[test]
    fn config_validation_rejects_bad_lists() {
        let base = tiny_config();
        let mut c = base.clone();
        c.seeds = vec![1, 1];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.divergences.clear();
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.methods = vec![Method::GenerativeGrid, Method::GenerativeGrid];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.tempering = -1.0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.n_obs = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::all() {
            assert_eq!(Method::by_name(m.name()).unwrap(), m);
        }
        assert!(Method::by_name("nonsense").is_err());
    }
}
