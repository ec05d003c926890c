//! Nonparametric stand-ins for the unknown data-generating density.
//!
//! Scalar data gets a Gaussian kernel density estimate with a
//! spread-adaptive bandwidth; paired regression data gets the predictive
//! density of a Gaussian process fitted from inputs to responses. Both feed
//! the generative benchmark, where the log density ratio is computed as
//! `log q_model - log g` directly instead of through a classifier.

use crate::gp::{fit_gp, GpModel, KernelConfig};
use crate::quad::sum_over_integers;
use crate::stats::{gaussian_log_pdf, log_densities_model, Dataset, ModelFamily, ProblemSpec};
use crate::{Error, Result};
use nalgebra::DMatrix;

const LN_SQRT_2PI: f64 = 0.9189385332046727;

/// Gaussian kernel density estimate of a scalar sample.
#[derive(Clone, Debug)]
pub struct KdeModel {
    points: Vec<f64>,
    pub bandwidth: f64,
    /// Log of the total mass the estimate puts on the non-negative integer
    /// lattice; zero when the estimate is used as an ordinary continuous
    /// density.
    pub log_lattice_norm: f64,
}

/// Type-7 quantile (linear interpolation between order statistics).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 < n {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    } else {
        sorted[lo]
    }
}

/// Fit a kernel density estimate with the spread-adaptive rule
/// `h = 0.9 min(sd, iqr/1.34) n^(-1/5)`; a zero interquartile range falls
/// back to the standard deviation alone. With `lattice_normalize` the
/// estimate is renormalized to unit mass over the non-negative integers,
/// which keeps it comparable to count-model densities.
pub fn fit_kde(data: &[f64], lattice_normalize: bool) -> Result<KdeModel> {
    if data.is_empty() {
        return Err(Error::EmptyInput("kernel density sample".into()));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let sd = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd == 0.0 {
        return Err(Error::DegenerateReference(
            "kernel density sample has zero spread".into(),
        ));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let bandwidth = 0.9 * spread * n.powf(-0.2);
    let mut model = KdeModel {
        points: data.to_vec(),
        bandwidth,
        log_lattice_norm: 0.0,
    };
    if lattice_normalize {
        let mass = sum_over_integers(|k| model.log_density(k as f64).exp())?;
        if mass <= 0.0 {
            return Err(Error::Numeric(
                "kernel density carries no mass on the integer lattice".into(),
            ));
        }
        model.log_lattice_norm = mass.ln();
    }
    Ok(model)
}

impl KdeModel {
    pub fn log_density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let mut max = f64::NEG_INFINITY;
        let exponents: Vec<f64> = self
            .points
            .iter()
            .map(|p| {
                let z = (x - p) / h;
                let e = -0.5 * z * z;
                max = max.max(e);
                e
            })
            .collect();
        if max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = exponents.iter().map(|e| (e - max).exp()).sum();
        max + sum.ln()
            - (self.points.len() as f64).ln()
            - h.ln()
            - LN_SQRT_2PI
            - self.log_lattice_norm
    }
}

/// Gaussian-process predictive density for paired data: the response density
/// at a new input is a Gaussian centered on the posterior mean with the
/// posterior variance plus observation noise.
#[derive(Clone, Debug)]
pub struct SupervisedGenModel {
    pub gp: GpModel,
}

pub fn fit_supervised(pairs: &[(f64, f64)]) -> Result<SupervisedGenModel> {
    if pairs.len() < 2 {
        return Err(Error::EmptyInput(
            "supervised density model needs at least two pairs".into(),
        ));
    }
    let inputs = DMatrix::from_fn(pairs.len(), 1, |i, _| pairs[i].0);
    let targets: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let init = KernelConfig::default_for(&inputs, &targets);
    let gp = fit_gp(inputs, targets, init)?;
    Ok(SupervisedGenModel { gp })
}

impl SupervisedGenModel {
    pub fn log_density(&self, x: f64, y: f64) -> f64 {
        let (mean, var) = self.gp.predict(&[x]);
        gaussian_log_pdf(mean, var + self.gp.config.noise_variance, y)
    }
}

/// A model of the true data-generating density, used as the denominator of
/// the generative log ratio.
#[derive(Clone, Debug)]
pub enum GenerativeModel {
    Kde(KdeModel),
    Supervised(SupervisedGenModel),
    /// A flat log density. With losses that are invariant to constant shifts
    /// of the log ratio this reproduces the exact-likelihood answer.
    Constant(f64),
}

impl GenerativeModel {
    /// Fit the family-appropriate estimator to observed data.
    pub fn fit(spec: &ProblemSpec, data: &Dataset, lattice_normalize: bool) -> Result<Self> {
        match (spec.family, data) {
            (ModelFamily::Poisson | ModelFamily::Gaussian, Dataset::Scalar(v)) => {
                Ok(GenerativeModel::Kde(fit_kde(v, lattice_normalize)?))
            }
            (ModelFamily::Regression, Dataset::Paired(v)) => {
                Ok(GenerativeModel::Supervised(fit_supervised(v)?))
            }
            _ => Err(Error::InvalidConfig(
                "dataset shape does not match model family".into(),
            )),
        }
    }

    pub fn log_densities(&self, data: &Dataset) -> Result<Vec<f64>> {
        match (self, data) {
            (GenerativeModel::Kde(kde), Dataset::Scalar(v)) => {
                Ok(v.iter().map(|&x| kde.log_density(x)).collect())
            }
            (GenerativeModel::Supervised(m), Dataset::Paired(v)) => {
                Ok(v.iter().map(|&(x, y)| m.log_density(x, y)).collect())
            }
            (GenerativeModel::Constant(c), _) => Ok(vec![*c; data.len()]),
            _ => Err(Error::InvalidConfig(
                "dataset shape does not match density model".into(),
            )),
        }
    }
}

/// Per-observation log ratio `log q_model(x; theta) - log g(x)`.
pub fn generative_log_ratio(
    spec: &ProblemSpec,
    theta: &[f64],
    g: &GenerativeModel,
    x_obs: &Dataset,
) -> Result<Vec<f64>> {
    let lp = log_densities_model(spec, theta, x_obs)?;
    let lg = g.log_densities(x_obs)?;
    Ok(lp.iter().zip(&lg).map(|(p, g)| p - g).collect())
}
