//! Grid-based generalized posterior beliefs.
//!
//! A belief over model parameters is `exp(-w n L(theta)) prior(theta)`,
//! normalized on a rectangular grid, where `L` is an estimated divergence
//! loss built from per-observation log density ratios. Three constructors
//! cover the benchmark arms: exact densities (the reference answer), a
//! surrogate smoothing of evaluated log ratios, and the direct generative
//! estimate on the full grid.

use crate::bayesopt::{run_bayesopt, AcquisitionTrace, BoConfig};
use crate::density::{generative_log_ratio, GenerativeModel};
use crate::divergence::DivergenceSpec;
use crate::rng::RngStream;
use crate::stats::{log_densities_model_into, log_densities_true, Dataset, ProblemSpec};
use crate::{Error, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Rectangular parameter grid with axis-wise trapezoid quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrid {
    /// Per-dimension sorted coordinate values.
    pub axes: Vec<Vec<f64>>,
}

impl ParamGrid {
    pub fn from_spec(spec: &ProblemSpec) -> ParamGrid {
        let axes = spec
            .param_bounds
            .iter()
            .zip(&spec.grid_sizes)
            .map(|(&(lo, hi), &n)| {
                if n == 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..n)
                        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                        .collect()
                }
            })
            .collect();
        ParamGrid { axes }
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the flat index, last axis fastest.
    pub fn point(&self, mut flat: usize) -> Vec<f64> {
        let mut coords = vec![0.0; self.dims()];
        for d in (0..self.dims()).rev() {
            let n = self.axes[d].len();
            coords[d] = self.axes[d][flat % n];
            flat /= n;
        }
        coords
    }

    /// Tensor-product trapezoid weights, aligned with flat indexing.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let axis_weights: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|axis| {
                let n = axis.len();
                if n == 1 {
                    return vec![1.0];
                }
                (0..n)
                    .map(|i| {
                        let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
                        let right = if i + 1 < n {
                            axis[i + 1] - axis[i]
                        } else {
                            0.0
                        };
                        0.5 * (left + right)
                    })
                    .collect()
            })
            .collect();
        let mut weights = vec![1.0; self.len()];
        for (flat, w) in weights.iter_mut().enumerate() {
            let mut rem = flat;
            for d in (0..self.dims()).rev() {
                let n = self.axes[d].len();
                *w *= axis_weights[d][rem % n];
                rem /= n;
            }
        }
        weights
    }
}

/// A normalized belief: `sum_i density[i] * quadrature_weight[i] = 1`.
#[derive(Clone, Debug)]
pub struct BeliefGrid {
    pub grid: ParamGrid,
    /// The loss surface the belief was built from.
    pub losses: Vec<f64>,
    pub density: Vec<f64>,
}

impl BeliefGrid {
    /// Parameter coordinates of the highest-density grid point.
    pub fn mode(&self) -> Vec<f64> {
        let (best, _) = self
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        self.grid.point(best)
    }
}

/// Exponentiate and normalize a loss surface.
///
/// `tempering` is the learning-rate weight on the loss; the observation
/// count multiplies the loss so it matches the scale of a log likelihood.
/// A `None` prior is uniform over the grid.
pub fn belief_from_losses(
    grid: &ParamGrid,
    losses: Vec<f64>,
    n_obs: usize,
    prior: Option<&[f64]>,
    tempering: f64,
) -> Result<BeliefGrid> {
    if losses.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} losses for a grid of {} points",
            losses.len(),
            grid.len()
        )));
    }
    if let Some(p) = prior {
        if p.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} prior values for a grid of {} points",
                p.len(),
                grid.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig(
                "prior values must be finite and nonnegative".into(),
            ));
        }
    }
    if !tempering.is_finite() || tempering <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "tempering weight must be positive and finite, got {tempering}"
        )));
    }
    if losses.iter().any(|l| l.is_nan()) {
        return Err(Error::Numeric("loss surface contains NaN".into()));
    }
    let scale = tempering * n_obs as f64;
    let log_post: Vec<f64> = losses
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let lp = prior.map_or(0.0, |p| p[i].ln());
            -scale * l + lp
        })
        .collect();
    let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::DegenerateBelief);
    }
    let weights = grid.quadrature_weights();
    let unnorm: Vec<f64> = log_post.iter().map(|lp| (lp - max).exp()).collect();
    let total: f64 = unnorm.iter().zip(&weights).map(|(u, w)| u * w).sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::DegenerateBelief);
    }
    let density = unnorm.iter().map(|u| u / total).collect();
    Ok(BeliefGrid {
        grid: grid.clone(),
        losses,
        density,
    })
}

/// Loss surface over the whole grid, in parallel: at each grid point the
/// per-observation log ratio is the model log density minus `baseline`.
fn grid_losses(
    spec: &ProblemSpec,
    div: &DivergenceSpec,
    grid: &ParamGrid,
    x_obs: &Dataset,
    baseline: &[f64],
) -> Result<Vec<f64>> {
    let n = x_obs.len();
    if baseline.len() != n {
        return Err(Error::InvalidConfig(format!(
            "{} baseline log densities for {n} observations",
            baseline.len()
        )));
    }
    (0..grid.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n]),
            |(lp, rho), flat| {
                let theta = grid.point(flat);
                log_densities_model_into(spec, &theta, x_obs, lp)?;
                for i in 0..n {
                    rho[i] = lp[i] - baseline[i];
                }
                div.loss_from_log_ratios(rho)
            },
        )
        .collect()
}

/// Reference belief from exact model and true-process densities. The
/// stabilization clamp of `div` is applied as given; pass an unstabilized
/// spec to leave exact ratios untouched.
pub fn true_belief(
    spec: &ProblemSpec,
    div: &DivergenceSpec,
    x_obs: &Dataset,
    tempering: f64,
) -> Result<BeliefGrid> {
    div.validate()?;
    let grid = ParamGrid::from_spec(spec);
    let lt = log_densities_true(spec, x_obs)?;
    let losses = grid_losses(spec, div, &grid, x_obs, &lt)?;
    belief_from_losses(&grid, losses, x_obs.len(), None, tempering)
}

/// Belief built from an acquisition trace: one smoothing surrogate per
/// observation, all sharing the trace surrogate's kernel and factorization,
/// predicts the per-observation log ratios at every grid point.
pub fn surrogate_belief(
    trace: &AcquisitionTrace,
    div: &DivergenceSpec,
    spec: &ProblemSpec,
    tempering: f64,
) -> Result<BeliefGrid> {
    div.validate()?;
    let gp = trace.surrogate.as_ref().ok_or_else(|| {
        Error::InvalidConfig("acquisition trace carries no fitted surrogate".into())
    })?;
    let n_train = trace.records.len();
    if n_train == 0 {
        return Err(Error::EmptyInput("acquisition trace".into()));
    }
    let n_obs = trace.records[0].per_point.len();
    if n_obs == 0 || trace.records.iter().any(|r| r.per_point.len() != n_obs) {
        return Err(Error::InvalidConfig(
            "trace records disagree on the observation count".into(),
        ));
    }
    if gp.n_train() != n_train || gp.dims() != spec.dim() {
        return Err(Error::InvalidConfig(format!(
            "surrogate shape ({} points, {} dims) does not match trace ({n_train}) and problem ({})",
            gp.n_train(),
            gp.dims(),
            spec.dim()
        )));
    }
    // One shared factorization: solving K A = Y for all per-observation
    // target columns at once leaves only a kernel-vector product per grid
    // point.
    let y = DMatrix::from_fn(n_train, n_obs, |i, j| trace.records[i].per_point[j]);
    let a = gp.solve_columns(&y);
    let grid = ParamGrid::from_spec(spec);
    let losses: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; n_obs],
            |rho, flat| {
                let theta = grid.point(flat);
                let k = gp.kernel_vector(&theta);
                for (j, r) in rho.iter_mut().enumerate() {
                    let mut mean = 0.0;
                    for i in 0..n_train {
                        mean += a[(i, j)] * k[i];
                    }
                    *r = mean;
                }
                div.loss_from_log_ratios(rho)
            },
        )
        .collect::<Result<Vec<f64>>>()?;
    belief_from_losses(&grid, losses, n_obs, None, tempering)
}

/// How the generative benchmark covers the parameter space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenerativeMode {
    /// Evaluate the generative log ratio at every grid point.
    Grid,
    /// Search with the acquisition loop, then smooth through the surrogate.
    BayesOpt,
}

/// Belief from a fitted data-density model. Grid mode returns no trace;
/// acquisition mode returns the trace it searched with.
#[allow(clippy::too_many_arguments)]
pub fn generative_belief(
    spec: &ProblemSpec,
    div: &DivergenceSpec,
    x_obs: &Dataset,
    g: &GenerativeModel,
    mode: GenerativeMode,
    bo: &BoConfig,
    tempering: f64,
    rng: &mut RngStream,
) -> Result<(BeliefGrid, Option<AcquisitionTrace>)> {
    div.validate()?;
    match mode {
        GenerativeMode::Grid => {
            let grid = ParamGrid::from_spec(spec);
            let lg = g.log_densities(x_obs)?;
            let losses = grid_losses(spec, div, &grid, x_obs, &lg)?;
            let belief = belief_from_losses(&grid, losses, x_obs.len(), None, tempering)?;
            Ok((belief, None))
        }
        GenerativeMode::BayesOpt => {
            let trace = run_bayesopt(
                |theta, _| generative_log_ratio(spec, theta, g, x_obs),
                &spec.param_bounds,
                *bo,
                rng,
            )?;
            let belief = surrogate_belief(&trace, div, spec, tempering)?;
            Ok((belief, Some(trace)))
        }
    }
}

/// Total variation distance between two beliefs on the same grid.
pub fn total_variation(a: &BeliefGrid, b: &BeliefGrid) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(
            "beliefs live on different grids".into(),
        ));
    }
    let w = a.grid.quadrature_weights();
    Ok(0.5
        * a.density
            .iter()
            .zip(&b.density)
            .zip(&w)
            .map(|((p, q), w)| (p - q).abs() * w)
            .sum::<f64>())
}
