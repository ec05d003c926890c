//! Statistical models, data-generating processes, samplers, exact log
//! densities, and classifier summary features.
//!
//! Three model families are supported: Poisson counts with unknown rate,
//! Gaussians with unknown mean and log-variance, and Gaussian linear
//! regression with unknown intercept, slope, and log noise variance. Each
//! family is paired with one well-specified and one misspecified
//! data-generating process.

use crate::rng::RngStream;
use crate::{Error, Result};
use rand_distr::{Distribution, Exp1, Gamma, Normal, Poisson, StandardNormal, StudentT};
use statrs::function::gamma::ln_gamma;

const LN_2PI: f64 = 1.8378770664093453;

/// Parametric family the belief update is defined over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelFamily {
    /// Counts; parameter `[rate]`.
    Poisson,
    /// Scalars; parameters `[mean, log_variance]`.
    Gaussian,
    /// (covariate, response) pairs; parameters `[intercept, slope, log_variance]`.
    Regression,
}

/// Known data-generating process used to simulate observations and to define
/// the exact reference update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrueProcess {
    Poisson {
        rate: f64,
    },
    NegBinomial {
        successes: f64,
        prob: f64,
    },
    Gaussian {
        mean: f64,
        variance: f64,
    },
    Laplace {
        location: f64,
        scale: f64,
    },
    LinearGaussian {
        intercept: f64,
        slope: f64,
        noise_sd: f64,
    },
    LinearStudentT {
        intercept: f64,
        slope: f64,
        scale: f64,
        dof: f64,
    },
}

/// A model family, its true process, and the parameter box the belief grid
/// lives on.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub family: ModelFamily,
    pub true_process: TrueProcess,
    pub label: String,
    /// Per-dimension (low, high); doubles as the uniform prior support.
    pub param_bounds: Vec<(f64, f64)>,
    /// Per-dimension grid resolution.
    pub grid_sizes: Vec<usize>,
}

impl ProblemSpec {
    pub fn poisson_wellspec() -> Self {
        ProblemSpec {
            family: ModelFamily::Poisson,
            true_process: TrueProcess::Poisson { rate: 3.0 },
            label: "poisson_wellspec".into(),
            param_bounds: vec![(0.1, 10.0)],
            grid_sizes: vec![1001],
        }
    }

    pub fn poisson_misspec() -> Self {
        ProblemSpec {
            true_process: TrueProcess::NegBinomial {
                successes: 10.0,
                prob: 0.8,
            },
            label: "poisson_misspec".into(),
            ..Self::poisson_wellspec()
        }
    }

    pub fn gaussian_wellspec() -> Self {
        ProblemSpec {
            family: ModelFamily::Gaussian,
            true_process: TrueProcess::Gaussian {
                mean: 1.0,
                variance: 1.0,
            },
            label: "gaussian_wellspec".into(),
            param_bounds: vec![(-3.0, 5.0), (-3.0, 3.0)],
            grid_sizes: vec![101, 101],
        }
    }

    pub fn gaussian_misspec() -> Self {
        ProblemSpec {
            true_process: TrueProcess::Laplace {
                location: 1.0,
                scale: 1.0,
            },
            label: "gaussian_misspec".into(),
            ..Self::gaussian_wellspec()
        }
    }

    pub fn regression_wellspec() -> Self {
        ProblemSpec {
            family: ModelFamily::Regression,
            true_process: TrueProcess::LinearGaussian {
                intercept: 0.0,
                slope: -1.0,
                noise_sd: 0.5,
            },
            label: "regression_wellspec".into(),
            param_bounds: vec![(-2.0, 2.0), (-3.0, 1.0), (-4.0, 2.0)],
            grid_sizes: vec![51, 51, 51],
        }
    }

    pub fn regression_misspec() -> Self {
        ProblemSpec {
            true_process: TrueProcess::LinearStudentT {
                intercept: 0.0,
                slope: -1.0,
                scale: 0.5,
                dof: 3.0,
            },
            label: "regression_misspec".into(),
            ..Self::regression_wellspec()
        }
    }

    /// Construct the spec named by `label` (e.g. "poisson_wellspec").
    pub fn by_label(label: &str) -> Result<Self> {
        match label {
            "poisson_wellspec" => Ok(Self::poisson_wellspec()),
            "poisson_misspec" => Ok(Self::poisson_misspec()),
            "gaussian_wellspec" => Ok(Self::gaussian_wellspec()),
            "gaussian_misspec" => Ok(Self::gaussian_misspec()),
            "regression_wellspec" => Ok(Self::regression_wellspec()),
            "regression_misspec" => Ok(Self::regression_misspec()),
            other => Err(Error::InvalidConfig(format!(
                "unknown problem '{other}'; expected one of poisson_wellspec, poisson_misspec, \
                 gaussian_wellspec, gaussian_misspec, regression_wellspec, regression_misspec"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.param_bounds.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(&self.param_bounds)
                .all(|(t, (lo, hi))| t.is_finite() && *t >= *lo && *t <= *hi)
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self.family {
            ModelFamily::Poisson => &["lambda"],
            ModelFamily::Gaussian => &["mu", "log_var"],
            ModelFamily::Regression => &["beta0", "beta1", "log_var"],
        }
    }

    /// Number of summary-feature columns (constant column included).
    pub fn summary_cols(&self) -> usize {
        match self.family {
            ModelFamily::Poisson => 2,
            ModelFamily::Gaussian => 3,
            ModelFamily::Regression => 7,
        }
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::OutOfBounds(format!(
                "theta has {} coordinates, problem '{}' has {}",
                theta.len(),
                self.label,
                self.dim()
            )));
        }
        if !self.contains(theta) {
            return Err(Error::OutOfBounds(format!(
                "theta {:?} outside bounds {:?} for '{}'",
                theta, self.param_bounds, self.label
            )));
        }
        Ok(())
    }
}

/// Observed or simulated data; scalar-valued for the unsupervised families,
/// (covariate, response) pairs for regression.
#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    Scalar(Vec<f64>),
    Paired(Vec<(f64, f64)>),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Scalar(v) => v.len(),
            Dataset::Paired(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Concatenation of two datasets of the same shape.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        match (self, other) {
            (Dataset::Scalar(a), Dataset::Scalar(b)) => {
                Ok(Dataset::Scalar(a.iter().chain(b).copied().collect()))
            }
            (Dataset::Paired(a), Dataset::Paired(b)) => {
                Ok(Dataset::Paired(a.iter().chain(b).copied().collect()))
            }
            _ => Err(Error::InvalidConfig(
                "cannot concatenate scalar and paired datasets".into(),
            )),
        }
    }

    /// Subset by indices (order preserved).
    pub fn select(&self, idx: &[usize]) -> Dataset {
        match self {
            Dataset::Scalar(v) => Dataset::Scalar(idx.iter().map(|&i| v[i]).collect()),
            Dataset::Paired(v) => Dataset::Paired(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

// --- Exact distribution functions -----------------------------------------

/// Log pmf of Poisson(rate) at a (possibly non-integral) point; -inf off
/// support.
pub fn poisson_log_pmf(rate: f64, x: f64) -> f64 {
    if x < 0.0 || x.fract() != 0.0 || !x.is_finite() {
        return f64::NEG_INFINITY;
    }
    x * rate.ln() - rate - ln_gamma(x + 1.0)
}

/// Log pmf of the negative binomial counting failures before the `r`-th
/// success with success probability `p`; -inf off support.
pub fn neg_binomial_log_pmf(r: f64, p: f64, x: f64) -> f64 {
    if x < 0.0 || x.fract() != 0.0 || !x.is_finite() {
        return f64::NEG_INFINITY;
    }
    ln_gamma(x + r) - ln_gamma(r) - ln_gamma(x + 1.0) + r * p.ln() + x * (1.0 - p).ln()
}

/// Log pdf of N(mean, variance).
pub fn gaussian_log_pdf(mean: f64, variance: f64, x: f64) -> f64 {
    let z = x - mean;
    -0.5 * (LN_2PI + variance.ln()) - 0.5 * z * z / variance
}

/// Log pdf of Laplace(location, scale).
pub fn laplace_log_pdf(location: f64, scale: f64, x: f64) -> f64 {
    -(2.0 * scale).ln() - (x - location).abs() / scale
}

/// Log pdf of a location-scale Student-t with `dof` degrees of freedom.
pub fn student_t_log_pdf(location: f64, scale: f64, dof: f64, x: f64) -> f64 {
    let z = (x - location) / scale;
    ln_gamma(0.5 * (dof + 1.0))
        - ln_gamma(0.5 * dof)
        - 0.5 * (dof * std::f64::consts::PI).ln()
        - scale.ln()
        - 0.5 * (dof + 1.0) * (z * z / dof).ln_1p()
}

// --- Simulation ------------------------------------------------------------

/// Draw `n` points from the model family at parameter `theta`.
///
/// Regression draws fresh standard-normal covariates per point. `n = 0` is a
/// valid empty dataset; `theta` outside the problem bounds is an error.
pub fn simulate_model(
    spec: &ProblemSpec,
    theta: &[f64],
    n: usize,
    rng: &mut RngStream,
) -> Result<Dataset> {
    spec.check_theta(theta)?;
    match spec.family {
        ModelFamily::Poisson => {
            let pois = Poisson::new(theta[0])
                .map_err(|e| Error::InvalidConfig(format!("poisson rate: {e}")))?;
            Ok(Dataset::Scalar((0..n).map(|_| pois.sample(rng)).collect()))
        }
        ModelFamily::Gaussian => {
            let sd = (0.5 * theta[1]).exp();
            let normal = Normal::new(theta[0], sd)
                .map_err(|e| Error::InvalidConfig(format!("gaussian params: {e}")))?;
            Ok(Dataset::Scalar(
                (0..n).map(|_| normal.sample(rng)).collect(),
            ))
        }
        ModelFamily::Regression => {
            let sd = (0.5 * theta[2]).exp();
            let pairs = (0..n)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(rng);
                    let eps: f64 = StandardNormal.sample(rng);
                    (x, theta[0] + theta[1] * x + sd * eps)
                })
                .collect();
            Ok(Dataset::Paired(pairs))
        }
    }
}

/// Draw `n` points from the problem's true data-generating process.
pub fn simulate_true(spec: &ProblemSpec, n: usize, rng: &mut RngStream) -> Dataset {
    match spec.true_process {
        TrueProcess::Poisson { rate } => {
            let pois = Poisson::new(rate).expect("positive rate");
            Dataset::Scalar((0..n).map(|_| pois.sample(rng)).collect())
        }
        TrueProcess::NegBinomial { successes, prob } => {
            // Gamma-Poisson mixture: rate ~ Gamma(r, (1-p)/p), count ~ Poisson(rate).
            let gamma = Gamma::new(successes, (1.0 - prob) / prob).expect("valid gamma");
            Dataset::Scalar(
                (0..n)
                    .map(|_| {
                        let lam: f64 = gamma.sample(rng).max(f64::MIN_POSITIVE);
                        Poisson::new(lam).expect("positive rate").sample(rng)
                    })
                    .collect(),
            )
        }
        TrueProcess::Gaussian { mean, variance } => {
            let normal = Normal::new(mean, variance.sqrt()).expect("valid normal");
            Dataset::Scalar((0..n).map(|_| normal.sample(rng)).collect())
        }
        TrueProcess::Laplace { location, scale } => Dataset::Scalar(
            (0..n)
                .map(|_| {
                    // Difference of two unit exponentials is standard Laplace.
                    let e1: f64 = Exp1.sample(rng);
                    let e2: f64 = Exp1.sample(rng);
                    location + scale * (e1 - e2)
                })
                .collect(),
        ),
        TrueProcess::LinearGaussian {
            intercept,
            slope,
            noise_sd,
        } => Dataset::Paired(
            (0..n)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(rng);
                    let eps: f64 = StandardNormal.sample(rng);
                    (x, intercept + slope * x + noise_sd * eps)
                })
                .collect(),
        ),
        TrueProcess::LinearStudentT {
            intercept,
            slope,
            scale,
            dof,
        } => {
            let t = StudentT::new(dof).expect("valid dof");
            Dataset::Paired(
                (0..n)
                    .map(|_| {
                        let x: f64 = StandardNormal.sample(rng);
                        let noise: f64 = t.sample(rng);
                        (x, intercept + slope * x + scale * noise)
                    })
                    .collect(),
            )
        }
    }
}

// --- Log densities over datasets -------------------------------------------

/// Per-point log density of the model at `theta`; regression points use the
/// conditional density of the response given its covariate. Points outside
/// the support yield -inf.
pub fn log_densities_model(spec: &ProblemSpec, theta: &[f64], data: &Dataset) -> Result<Vec<f64>> {
    let mut out = vec![0.0; data.len()];
    log_densities_model_into(spec, theta, data, &mut out)?;
    Ok(out)
}

/// In-place variant of [`log_densities_model`] for hot grid loops.
pub fn log_densities_model_into(
    spec: &ProblemSpec,
    theta: &[f64],
    data: &Dataset,
    out: &mut [f64],
) -> Result<()> {
    spec.check_theta(theta)?;
    assert_eq!(out.len(), data.len());
    match (spec.family, data) {
        (ModelFamily::Poisson, Dataset::Scalar(v)) => {
            // Shared terms hoisted: the grid loop calls this once per theta.
            let ln_rate = theta[0].ln();
            for (o, &x) in out.iter_mut().zip(v) {
                *o = if x < 0.0 || x.fract() != 0.0 {
                    f64::NEG_INFINITY
                } else {
                    x * ln_rate - theta[0] - ln_gamma(x + 1.0)
                };
            }
            Ok(())
        }
        (ModelFamily::Gaussian, Dataset::Scalar(v)) => {
            let variance = theta[1].exp();
            let log_norm = -0.5 * (LN_2PI + theta[1]);
            let inv2v = 0.5 / variance;
            for (o, &x) in out.iter_mut().zip(v) {
                let z = x - theta[0];
                *o = log_norm - z * z * inv2v;
            }
            Ok(())
        }
        (ModelFamily::Regression, Dataset::Paired(v)) => {
            let variance = theta[2].exp();
            let log_norm = -0.5 * (LN_2PI + theta[2]);
            let inv2v = 0.5 / variance;
            for (o, &(x, y)) in out.iter_mut().zip(v) {
                let z = y - theta[0] - theta[1] * x;
                *o = log_norm - z * z * inv2v;
            }
            Ok(())
        }
        _ => Err(Error::InvalidConfig(
            "dataset shape does not match model family".into(),
        )),
    }
}

/// Per-point log density of the true data-generating process.
pub fn log_densities_true(spec: &ProblemSpec, data: &Dataset) -> Result<Vec<f64>> {
    let point_density = |x: f64, y: f64| match spec.true_process {
        TrueProcess::Poisson { rate } => poisson_log_pmf(rate, x),
        TrueProcess::NegBinomial { successes, prob } => neg_binomial_log_pmf(successes, prob, x),
        TrueProcess::Gaussian { mean, variance } => gaussian_log_pdf(mean, variance, x),
        TrueProcess::Laplace { location, scale } => laplace_log_pdf(location, scale, x),
        TrueProcess::LinearGaussian {
            intercept,
            slope,
            noise_sd,
        } => gaussian_log_pdf(intercept + slope * x, noise_sd * noise_sd, y),
        TrueProcess::LinearStudentT {
            intercept,
            slope,
            scale,
            dof,
        } => student_t_log_pdf(intercept + slope * x, scale, dof, y),
    };
    match data {
        Dataset::Scalar(v) => {
            if matches!(
                spec.true_process,
                TrueProcess::LinearGaussian { .. } | TrueProcess::LinearStudentT { .. }
            ) {
                return Err(Error::InvalidConfig(
                    "scalar data with a regression true process".into(),
                ));
            }
            Ok(v.iter().map(|&x| point_density(x, 0.0)).collect())
        }
        Dataset::Paired(v) => {
            if !matches!(
                spec.true_process,
                TrueProcess::LinearGaussian { .. } | TrueProcess::LinearStudentT { .. }
            ) {
                return Err(Error::InvalidConfig(
                    "paired data with a scalar true process".into(),
                ));
            }
            Ok(v.iter().map(|&(x, y)| point_density(x, y)).collect())
        }
    }
}

// --- Summary features -------------------------------------------------------

/// Reference statistics that fix the summary transform. Computed once from a
/// training-visible sample and reused for held-out rows.
#[derive(Clone, Copy, Debug)]
pub struct SummaryMoments {
    pub x_mean: f64,
    pub y_mean: f64,
    pub y_sd: f64,
}

/// Compute the reference moments of `reference` for the given family.
pub fn summary_moments(spec: &ProblemSpec, reference: &Dataset) -> Result<SummaryMoments> {
    if reference.is_empty() {
        return Err(Error::EmptyInput("summary reference sample".into()));
    }
    match (spec.family, reference) {
        (ModelFamily::Poisson, Dataset::Scalar(_)) => Ok(SummaryMoments {
            x_mean: 0.0,
            y_mean: 0.0,
            y_sd: 1.0,
        }),
        (ModelFamily::Gaussian, Dataset::Scalar(v)) => {
            let x_mean = v.iter().sum::<f64>() / v.len() as f64;
            Ok(SummaryMoments {
                x_mean,
                y_mean: 0.0,
                y_sd: 1.0,
            })
        }
        (ModelFamily::Regression, Dataset::Paired(v)) => {
            let n = v.len() as f64;
            let x_mean = v.iter().map(|p| p.0).sum::<f64>() / n;
            let y_mean = v.iter().map(|p| p.1).sum::<f64>() / n;
            let y_var = v.iter().map(|p| (p.1 - y_mean).powi(2)).sum::<f64>() / n;
            let y_sd = y_var.sqrt();
            if y_sd == 0.0 {
                return Err(Error::DegenerateReference(
                    "reference responses have zero spread".into(),
                ));
            }
            Ok(SummaryMoments {
                x_mean,
                y_mean,
                y_sd,
            })
        }
        _ => Err(Error::InvalidConfig(
            "dataset shape does not match model family".into(),
        )),
    }
}

/// Summary-feature matrix (rows = data points) under fixed reference moments.
///
/// Poisson: `[1, x]`. Gaussian: `[1, x, |x - x_mean|]`. Regression:
/// `[1, y, (y-ym)^2, (y-ym)^4/sd^4, x, (x-xm)^2, (y-ym)(x-xm)]`.
pub fn summaries_with(
    spec: &ProblemSpec,
    data: &Dataset,
    m: &SummaryMoments,
) -> Result<nalgebra::DMatrix<f64>> {
    let rows = data.len();
    let cols = spec.summary_cols();
    let mut out = nalgebra::DMatrix::zeros(rows, cols);
    match (spec.family, data) {
        (ModelFamily::Poisson, Dataset::Scalar(v)) => {
            for (i, &x) in v.iter().enumerate() {
                out[(i, 0)] = 1.0;
                out[(i, 1)] = x;
            }
        }
        (ModelFamily::Gaussian, Dataset::Scalar(v)) => {
            for (i, &x) in v.iter().enumerate() {
                out[(i, 0)] = 1.0;
                out[(i, 1)] = x;
                out[(i, 2)] = (x - m.x_mean).abs();
            }
        }
        (ModelFamily::Regression, Dataset::Paired(v)) => {
            let sd4 = m.y_sd.powi(4);
            for (i, &(x, y)) in v.iter().enumerate() {
                let dy = y - m.y_mean;
                let dx = x - m.x_mean;
                out[(i, 0)] = 1.0;
                out[(i, 1)] = y;
                out[(i, 2)] = dy * dy;
                out[(i, 3)] = dy.powi(4) / sd4;
                out[(i, 4)] = x;
                out[(i, 5)] = dx * dx;
                out[(i, 6)] = dy * dx;
            }
        }
        _ => {
            return Err(Error::InvalidConfig(
                "dataset shape does not match model family".into(),
            ))
        }
    }
    Ok(out)
}

/// Convenience: derive moments from `reference`, then build summaries of
/// `data`.
pub fn summaries(
    spec: &ProblemSpec,
    data: &Dataset,
    reference: &Dataset,
) -> Result<nalgebra::DMatrix<f64>> {
    let m = summary_moments(spec, reference)?;
    summaries_with(spec, data, &m)
}
