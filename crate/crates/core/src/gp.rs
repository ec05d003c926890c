//! Gaussian-process regression with an additive Matern-3/2 + constant kernel
//! and learned observation noise.
//!
//! Used in three places: as the surrogate over mean log ratios that drives
//! acquisition, as the per-observation smoother of log-ratio surfaces, and as
//! the predictive-density generative baseline for the regression problem.
//! The prior mean is zero everywhere.

use crate::optim::{minimize, Objective};
use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

const SQRT3: f64 = 1.7320508075688772;
const LN_2PI: f64 = 1.8378770664093453;
const JITTER_BASE: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-4;

/// Kernel hyperparameters. All variances are strictly positive except the
/// observation noise, which may be zero (a small jitter is always added).
#[derive(Clone, Debug, PartialEq)]
pub struct KernelConfig {
    /// One positive lengthscale per input dimension.
    pub matern_lengthscales: Vec<f64>,
    pub matern_variance: f64,
    pub constant_variance: f64,
    pub noise_variance: f64,
}

impl KernelConfig {
    /// Data-driven starting point: lengthscales a third of the input width,
    /// signal variances at the target variance.
    pub fn default_for(inputs: &DMatrix<f64>, targets: &[f64]) -> KernelConfig {
        let dims = inputs.ncols();
        let widths: Vec<f64> = (0..dims).map(|d| column_width(inputs, d)).collect();
        let n = targets.len().max(1) as f64;
        let mean = targets.iter().sum::<f64>() / n;
        let var = targets.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
        let var = var.max(1e-4);
        KernelConfig {
            matern_lengthscales: widths.iter().map(|w| w / 3.0).collect(),
            matern_variance: var,
            constant_variance: var,
            noise_variance: (0.05 * var).max(1e-6),
        }
    }

    pub fn validate(&self, dims: usize) -> Result<()> {
        if self.matern_lengthscales.len() != dims {
            return Err(Error::InvalidConfig(format!(
                "kernel has {} lengthscales for {dims}-dimensional inputs",
                self.matern_lengthscales.len()
            )));
        }
        let positive = self.matern_lengthscales.iter().all(|l| *l > 0.0)
            && self.matern_variance > 0.0
            && self.constant_variance > 0.0;
        if !positive || self.noise_variance < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "kernel hyperparameters must be positive (noise nonnegative): {self:?}"
            )));
        }
        Ok(())
    }
}

fn column_width(inputs: &DMatrix<f64>, d: usize) -> f64 {
    let col = inputs.column(d);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in col.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let w = hi - lo;
    if w > 0.0 && w.is_finite() {
        w
    } else {
        1.0
    }
}

/// Scaled distance s = sqrt(sum_d ((a_d-b_d)/l_d)^2).
fn scaled_dist(a: &[f64], b: &[f64], ls: &[f64]) -> f64 {
    let mut s2 = 0.0;
    for d in 0..a.len() {
        let z = (a[d] - b[d]) / ls[d];
        s2 += z * z;
    }
    s2.sqrt()
}

/// Kernel value without the noise term.
fn kernel_value(cfg: &KernelConfig, a: &[f64], b: &[f64]) -> f64 {
    let s = scaled_dist(a, b, &cfg.matern_lengthscales);
    cfg.matern_variance * (1.0 + SQRT3 * s) * (-SQRT3 * s).exp() + cfg.constant_variance
}

/// A fitted Gaussian process with cached Cholesky factorization.
#[derive(Clone, Debug)]
pub struct GpModel {
    pub config: KernelConfig,
    inputs: DMatrix<f64>,
    targets: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    /// Diagonal jitter that was required to factorize.
    pub jitter: f64,
}

fn build_kernel_matrix(cfg: &KernelConfig, inputs: &DMatrix<f64>) -> DMatrix<f64> {
    let n = inputs.nrows();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        let xi: Vec<f64> = inputs.row(i).iter().copied().collect();
        for j in 0..=i {
            let xj: Vec<f64> = inputs.row(j).iter().copied().collect();
            let v = kernel_value(cfg, &xi, &xj);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

fn factorize(cfg: &KernelConfig, inputs: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = inputs.nrows();
    let base = build_kernel_matrix(cfg, inputs);
    let mut jitter = JITTER_BASE;
    loop {
        let mut k = base.clone();
        for i in 0..n {
            k[(i, i)] += cfg.noise_variance + jitter;
        }
        if let Some(chol) = Cholesky::new(k) {
            return Ok((chol, jitter));
        }
        jitter *= 10.0;
        if jitter > JITTER_MAX {
            return Err(Error::Numeric(format!(
                "kernel matrix not positive definite even with jitter {JITTER_MAX:e} \
                 (n = {n}, config {cfg:?})"
            )));
        }
    }
}

impl GpModel {
    /// Build a model at fixed hyperparameters (no optimization).
    pub fn from_config(
        inputs: DMatrix<f64>,
        targets: Vec<f64>,
        config: KernelConfig,
    ) -> Result<GpModel> {
        if inputs.nrows() == 0 {
            return Err(Error::EmptyInput("gaussian-process training set".into()));
        }
        if inputs.nrows() != targets.len() {
            return Err(Error::InvalidConfig(format!(
                "{} inputs but {} targets",
                inputs.nrows(),
                targets.len()
            )));
        }
        config.validate(inputs.ncols())?;
        let (chol, jitter) = factorize(&config, &inputs)?;
        let targets = DVector::from_vec(targets);
        let alpha = chol.solve(&targets);
        Ok(GpModel {
            config,
            inputs,
            targets,
            chol,
            alpha,
            jitter,
        })
    }

    pub fn n_train(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn dims(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    /// Latent posterior mean and variance at a point (observation noise not
    /// added to the variance).
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let kstar = self.kernel_vector(x);
        let mean = kstar.dot(&self.alpha);
        let v = self.chol.solve(&kstar);
        let prior = self.config.matern_variance + self.config.constant_variance;
        let var = (prior - kstar.dot(&v)).max(0.0);
        (mean, var)
    }

    /// Cross-kernel vector between a query point and the training inputs.
    pub fn kernel_vector(&self, x: &[f64]) -> DVector<f64> {
        let n = self.n_train();
        let mut k = DVector::zeros(n);
        for i in 0..n {
            let xi: Vec<f64> = self.inputs.row(i).iter().copied().collect();
            k[i] = kernel_value(&self.config, &xi, x);
        }
        k
    }

    /// Same inputs and factorization, different targets.
    pub fn with_targets(&self, targets: Vec<f64>) -> Result<GpModel> {
        if targets.len() != self.n_train() {
            return Err(Error::InvalidConfig(format!(
                "{} targets for {} training inputs",
                targets.len(),
                self.n_train()
            )));
        }
        let targets = DVector::from_vec(targets);
        let alpha = self.chol.solve(&targets);
        Ok(GpModel {
            targets,
            alpha,
            ..self.clone()
        })
    }

    /// Solve K X = B against the cached factorization (B columns are
    /// independent right-hand sides).
    pub fn solve_columns(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    /// Log marginal likelihood of the training targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.n_train() as f64;
        let log_det: f64 = self
            .chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|v| v.ln())
            .sum::<f64>()
            * 2.0;
        -0.5 * self.targets.dot(&self.alpha) - 0.5 * log_det - 0.5 * n * LN_2PI
    }
}

// --- Hyperparameter optimization --------------------------------------------

// Log-space parameter layout: [ln l_1 .. ln l_D, ln m_var, ln c_var, ln n_var].
fn config_to_log(cfg: &KernelConfig) -> Vec<f64> {
    let mut h: Vec<f64> = cfg.matern_lengthscales.iter().map(|l| l.ln()).collect();
    h.push(cfg.matern_variance.ln());
    h.push(cfg.constant_variance.ln());
    h.push(cfg.noise_variance.max(1e-12).ln());
    h
}

fn config_from_log(h: &[f64], dims: usize) -> KernelConfig {
    KernelConfig {
        matern_lengthscales: h[..dims].iter().map(|v| v.exp()).collect(),
        matern_variance: h[dims].exp(),
        constant_variance: h[dims + 1].exp(),
        noise_variance: h[dims + 2].exp(),
    }
}

struct LmlObjective<'a> {
    inputs: &'a DMatrix<f64>,
    targets: &'a DVector<f64>,
}

impl LmlObjective<'_> {
    fn prepare(&self, h: &[f64]) -> Option<(KernelConfig, Cholesky<f64, Dyn>, DVector<f64>)> {
        let cfg = config_from_log(h, self.inputs.ncols());
        let n = self.inputs.nrows();
        let mut k = build_kernel_matrix(&cfg, self.inputs);
        for i in 0..n {
            k[(i, i)] += cfg.noise_variance + JITTER_BASE;
        }
        let chol = Cholesky::new(k)?;
        let alpha = chol.solve(self.targets);
        Some((cfg, chol, alpha))
    }

    fn neg_lml(&self, chol: &Cholesky<f64, Dyn>, alpha: &DVector<f64>) -> f64 {
        let n = self.inputs.nrows() as f64;
        let log_det: f64 = chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|v| v.ln())
            .sum::<f64>()
            * 2.0;
        0.5 * self.targets.dot(alpha) + 0.5 * log_det + 0.5 * n * LN_2PI
    }
}

impl Objective for LmlObjective<'_> {
    fn value(&self, h: &[f64]) -> f64 {
        match self.prepare(h) {
            Some((_, chol, alpha)) => self.neg_lml(&chol, &alpha),
            None => f64::INFINITY,
        }
    }

    // Gradient of the negative log marginal likelihood in log-hyperparameter
    // space: -1/2 tr((aa' - K^-1) dK/dh) per hyperparameter.
    fn value_grad(&self, h: &[f64]) -> (f64, Vec<f64>) {
        let dims = self.inputs.ncols();
        let Some((cfg, chol, alpha)) = self.prepare(h) else {
            return (f64::INFINITY, vec![0.0; h.len()]);
        };
        let value = self.neg_lml(&chol, &alpha);
        let n = self.inputs.nrows();
        let kinv = chol.inverse();
        // For each pair (i, j): W_ij = alpha_i alpha_j - K^-1_ij, accumulated
        // against each hyperparameter's kernel derivative.
        let mut grad = vec![0.0f64; h.len()];
        for i in 0..n {
            let xi: Vec<f64> = self.inputs.row(i).iter().copied().collect();
            for j in 0..n {
                let xj: Vec<f64> = self.inputs.row(j).iter().copied().collect();
                let w = alpha[i] * alpha[j] - kinv[(i, j)];
                let s = scaled_dist(&xi, &xj, &cfg.matern_lengthscales);
                let decay = (-SQRT3 * s).exp();
                // d k / d ln l_d = 3 m_var decay (dx_d / l_d)^2
                for d in 0..dims {
                    let z = (xi[d] - xj[d]) / cfg.matern_lengthscales[d];
                    grad[d] += w * 3.0 * cfg.matern_variance * decay * z * z;
                }
                // d k / d ln m_var = matern term itself
                grad[dims] += w * cfg.matern_variance * (1.0 + SQRT3 * s) * decay;
                // d k / d ln c_var = c_var (all pairs)
                grad[dims + 1] += w * cfg.constant_variance;
                // d k / d ln n_var = n_var on the diagonal
                if i == j {
                    grad[dims + 2] += w * cfg.noise_variance;
                }
            }
        }
        // Negative LML: flip sign of d LML / dh = 1/2 accumulate.
        for gv in grad.iter_mut() {
            *gv *= -0.5;
        }
        (value, grad)
    }
}

/// Log marginal likelihood and its gradient with respect to the logarithms
/// of the hyperparameters, ordered [lengthscale_1.., matern_variance,
/// constant_variance, noise_variance] — the quantity the fitting ascends.
pub fn lml_and_gradient(
    inputs: &DMatrix<f64>,
    targets: &[f64],
    config: &KernelConfig,
) -> Result<(f64, Vec<f64>)> {
    config.validate(inputs.ncols())?;
    if inputs.nrows() != targets.len() || targets.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "{} targets for {} input rows",
            targets.len(),
            inputs.nrows()
        )));
    }
    let t = DVector::from_column_slice(targets);
    let objective = LmlObjective {
        inputs,
        targets: &t,
    };
    let (neg, mut grad) = objective.value_grad(&config_to_log(config));
    if !neg.is_finite() {
        return Err(Error::Numeric(
            "kernel matrix is not positive definite at this configuration".into(),
        ));
    }
    for g in &mut grad {
        *g = -*g;
    }
    Ok((-neg, grad))
}

// Deterministic multi-start multipliers for (lengthscales, m_var, c_var, noise).
const START_SCALES: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, 1.0],
    [0.25, 1.0, 1.0, 0.1],
    [4.0, 0.5, 0.5, 0.01],
    [1.0, 2.0, 0.25, 1.0],
];

fn fit_with_starts(
    inputs: DMatrix<f64>,
    targets: Vec<f64>,
    init: &KernelConfig,
    starts: &[[f64; 4]],
) -> Result<GpModel> {
    if inputs.nrows() < 2 {
        return Err(Error::InvalidConfig(format!(
            "hyperparameter fitting needs at least 2 points, got {}",
            inputs.nrows()
        )));
    }
    init.validate(inputs.ncols())?;
    let dims = inputs.ncols();
    let widths: Vec<f64> = (0..dims).map(|d| column_width(&inputs, d)).collect();

    // Box bounds in log space: lengthscales within [1e-2, 1e2] x data width,
    // variances within [1e-6, 1e4].
    let mut lo: Vec<f64> = widths.iter().map(|w| (1e-2 * w).ln()).collect();
    let mut hi: Vec<f64> = widths.iter().map(|w| (1e2 * w).ln()).collect();
    for _ in 0..3 {
        lo.push(1e-6f64.ln());
        hi.push(1e4f64.ln());
    }

    let targets_vec = DVector::from_vec(targets.clone());
    let objective = LmlObjective {
        inputs: &inputs,
        targets: &targets_vec,
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for scales in starts {
        let start_cfg = KernelConfig {
            matern_lengthscales: init
                .matern_lengthscales
                .iter()
                .map(|l| l * scales[0])
                .collect(),
            matern_variance: init.matern_variance * scales[1],
            constant_variance: init.constant_variance * scales[2],
            noise_variance: (init.noise_variance * scales[3]).max(1e-6),
        };
        let mut h0 = config_to_log(&start_cfg);
        for i in 0..h0.len() {
            h0[i] = h0[i].clamp(lo[i], hi[i]);
        }
        let r = minimize(&objective, &h0, &lo, &hi, 60, 1e-5);
        if r.value.is_finite() && best.as_ref().map_or(true, |(v, _)| r.value < *v) {
            best = Some((r.value, r.x));
        }
    }
    let (_, h) = best.ok_or_else(|| {
        Error::Numeric("no hyperparameter start produced a finite marginal likelihood".into())
    })?;
    GpModel::from_config(inputs, targets, config_from_log(&h, dims))
}

/// Fit hyperparameters by maximizing the log marginal likelihood with a
/// multi-start quasi-Newton search on log hyperparameters, then return the
/// fitted model. Needs at least two training points.
pub fn fit_gp(inputs: DMatrix<f64>, targets: Vec<f64>, init: KernelConfig) -> Result<GpModel> {
    fit_with_starts(inputs, targets, &init, &START_SCALES)
}

/// Single-start refit from known-good hyperparameters. Appropriate when the
/// training set grew slightly and the likelihood optimum cannot have moved
/// far.
pub fn refit_warm(inputs: DMatrix<f64>, targets: Vec<f64>, init: &KernelConfig) -> Result<GpModel> {
    fit_with_starts(inputs, targets, init, &START_SCALES[..1])
}
