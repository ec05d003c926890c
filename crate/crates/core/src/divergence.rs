//! Divergence-based losses: generators applied to log density ratios,
//! truncation of those ratios, sample-mean loss estimates, and quadrature
//! oracles for exact divergence values.
//!
//! Loss estimates average a generator f over per-point ratios t_i =
//! p(X_i|theta)/g(X_i) with X_i drawn from g, so every loss is an estimate of
//! the integral of f(p/g) with respect to g. The likelihood-based loss uses
//! f(t) = -log t, under which g cancels from the normalized belief exactly.

use crate::quad::{integrate, sum_over_integers};
use crate::{Error, Result};

/// Divergence family of a loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DivergenceKind {
    /// f(t) = -log t; the belief update reduces to the likelihood posterior.
    Kl,
    /// f(t) = 1 - sqrt(t); bounded, tail-robust.
    SqHellinger,
    /// f(t) = |t - 1| capped at t = 1; estimates the total variation
    /// distance (mass scale [0, 2]) via one-sided excess.
    Tvd,
    /// One-parameter family interpolating squared Hellinger (alpha = 1/2, up
    /// to a factor 4) and the likelihood loss (alpha -> 1).
    Alpha,
}

/// A divergence loss plus the truncation interval applied to log ratios
/// before the generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceSpec {
    pub kind: DivergenceKind,
    /// Present iff `kind == Alpha`; constrained to (0, 1).
    pub alpha: Option<f64>,
    pub clamp_lo: f64,
    pub clamp_hi: f64,
}

/// Default stabilization interval for estimated log ratios.
pub const CLAMP_LO_DEFAULT: f64 = -5.0;
pub const CLAMP_HI_DEFAULT: f64 = 3.0;

impl DivergenceSpec {
    pub fn kl() -> Self {
        DivergenceSpec {
            kind: DivergenceKind::Kl,
            alpha: None,
            clamp_lo: CLAMP_LO_DEFAULT,
            clamp_hi: CLAMP_HI_DEFAULT,
        }
    }

    pub fn sq_hellinger() -> Self {
        DivergenceSpec {
            kind: DivergenceKind::SqHellinger,
            ..Self::kl()
        }
    }

    /// Total variation: ratios above one never reduce the loss, so the
    /// upper truncation sits at log-ratio zero.
    pub fn tvd() -> Self {
        DivergenceSpec {
            kind: DivergenceKind::Tvd,
            alpha: None,
            clamp_lo: CLAMP_LO_DEFAULT,
            clamp_hi: 0.0,
        }
    }

    pub fn alpha(alpha: f64) -> Result<Self> {
        let spec = DivergenceSpec {
            kind: DivergenceKind::Alpha,
            alpha: Some(alpha),
            clamp_lo: CLAMP_LO_DEFAULT,
            clamp_hi: CLAMP_HI_DEFAULT,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The benchmark's eight losses in canonical order.
    pub fn standard_set() -> Vec<DivergenceSpec> {
        let mut v = vec![Self::tvd(), Self::sq_hellinger()];
        for a in [0.5, 0.6, 0.7, 0.8, 0.9] {
            v.push(Self::alpha(a).expect("alpha in range"));
        }
        v.push(Self::kl());
        v
    }

    /// Parse "kl", "sq_hellinger", "tvd", or "alpha_<value>".
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "kl" => Ok(Self::kl()),
            "sq_hellinger" => Ok(Self::sq_hellinger()),
            "tvd" => Ok(Self::tvd()),
            other => {
                if let Some(a) = other.strip_prefix("alpha_") {
                    let alpha: f64 = a.parse().map_err(|_| {
                        Error::InvalidConfig(format!("cannot parse alpha value in '{other}'"))
                    })?;
                    Self::alpha(alpha)
                } else {
                    Err(Error::InvalidConfig(format!(
                        "unknown divergence '{other}'; expected kl, sq_hellinger, tvd, or alpha_<a>"
                    )))
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            DivergenceKind::Kl => "kl".into(),
            DivergenceKind::SqHellinger => "sq_hellinger".into(),
            DivergenceKind::Tvd => "tvd".into(),
            DivergenceKind::Alpha => format!("alpha_{}", self.alpha.unwrap()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clamp_lo < self.clamp_hi) {
            return Err(Error::InvalidConfig(format!(
                "clamp_lo {} must be below clamp_hi {}",
                self.clamp_lo, self.clamp_hi
            )));
        }
        match (self.kind, self.alpha) {
            (DivergenceKind::Alpha, Some(a)) if a > 0.0 && a < 1.0 => {}
            (DivergenceKind::Alpha, Some(a)) => {
                return Err(Error::InvalidConfig(format!(
                    "alpha must lie strictly inside (0, 1), got {a}"
                )))
            }
            (DivergenceKind::Alpha, None) => {
                return Err(Error::InvalidConfig(
                    "alpha divergence without alpha".into(),
                ))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidConfig(
                    "alpha value given for a non-alpha divergence".into(),
                ))
            }
            (_, None) => {}
        }
        if self.kind == DivergenceKind::Tvd && self.clamp_hi != 0.0 {
            return Err(Error::InvalidConfig(
                "total variation requires the upper truncation at log-ratio zero".into(),
            ));
        }
        Ok(())
    }

    /// Copy with custom truncation bounds (for tests and sensitivity runs).
    pub fn with_clamp(mut self, lo: f64, hi: f64) -> Self {
        self.clamp_lo = lo;
        self.clamp_hi = hi;
        self
    }

    /// Copy with the stabilization truncation removed.
    ///
    /// Intended for exact density ratios, which need no numerical guard; the
    /// total-variation cap at log-ratio zero is part of the estimator itself
    /// (it realizes the one-sided-excess identity), so it stays.
    pub fn unstabilized(&self) -> Self {
        let hi = if self.kind == DivergenceKind::Tvd {
            0.0
        } else {
            f64::INFINITY
        };
        DivergenceSpec {
            clamp_lo: f64::NEG_INFINITY,
            clamp_hi: hi,
            ..*self
        }
    }

    /// Truncate a log ratio to the spec's interval. Accepts +-inf.
    pub fn clamp(&self, rho: f64) -> f64 {
        rho.max(self.clamp_lo).min(self.clamp_hi)
    }

    /// Generator f evaluated at t = exp(rho); rho is assumed already
    /// truncated. f(1) = 0 exactly for every kind.
    pub fn generator(&self, rho: f64) -> f64 {
        match self.kind {
            DivergenceKind::Kl => -rho,
            DivergenceKind::SqHellinger => 1.0 - (0.5 * rho).exp(),
            DivergenceKind::Tvd => (rho.exp() - 1.0).abs(),
            DivergenceKind::Alpha => {
                let a = self.alpha.expect("validated alpha");
                // (1 - t^(1-a)) / (a(1-a)): four times the squared-Hellinger
                // generator at a = 1/2, and -log t in the a -> 1 limit.
                (1.0 - ((1.0 - a) * rho).exp()) / (a * (1.0 - a))
            }
        }
    }

    /// Sample-mean loss over per-point log ratios (truncated, then passed
    /// through the generator).
    pub fn loss_from_log_ratios(&self, rhos: &[f64]) -> Result<f64> {
        if rhos.is_empty() {
            return Err(Error::EmptyInput("log-ratio sequence".into()));
        }
        let sum: f64 = rhos.iter().map(|&r| self.generator(self.clamp(r))).sum();
        Ok(sum / rhos.len() as f64)
    }
}

// Pointwise integrand of the exact divergence: the generator's contribution
// at a point where the two log densities are lp and lg, weighted by g. The
// alpha family integrates p^alpha g^(1-alpha) (the orientation whose
// alpha -> 1 limit is the classical KL of p from g).
fn divergence_integrand(spec: &DivergenceSpec, lp: f64, lg: f64) -> f64 {
    match spec.kind {
        DivergenceKind::Kl => {
            let g = lg.exp();
            if g == 0.0 {
                0.0
            } else if lp == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                (lg - lp) * g
            }
        }
        DivergenceKind::SqHellinger => lg.exp() - (0.5 * (lp + lg)).exp(),
        DivergenceKind::Tvd => (lp.exp() - lg.exp()).abs(),
        DivergenceKind::Alpha => {
            let a = spec.alpha.expect("validated alpha");
            (lg.exp() - (a * lp + (1.0 - a) * lg).exp()) / (a * (1.0 - a))
        }
    }
}

/// Exact divergence between continuous densities given their log-density
/// functions, by adaptive quadrature over `[lo, hi]`.
///
/// The likelihood (KL-type) loss integrates -log(p/g) against g; divergent
/// integrals (g positive where p vanishes) come back as +inf.
pub fn analytic_divergence_continuous(
    spec: &DivergenceSpec,
    log_p: impl Fn(f64) -> f64,
    log_g: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    spec.validate()?;
    let r = integrate(
        |x| divergence_integrand(spec, log_p(x), log_g(x)),
        lo,
        hi,
        1e-10,
        1e-10,
    )?;
    Ok(r.value)
}

/// Exact divergence between densities on the nonnegative integers.
pub fn analytic_divergence_discrete(
    spec: &DivergenceSpec,
    log_p: impl Fn(u64) -> f64,
    log_g: impl Fn(u64) -> f64,
) -> Result<f64> {
    spec.validate()?;
    sum_over_integers(|k| divergence_integrand(spec, log_p(k), log_g(k)))
}

fn kl_integrand(lp: f64, lg: f64) -> f64 {
    let p = lp.exp();
    if p == 0.0 {
        0.0
    } else if lg == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        (lp - lg) * p
    }
}

/// Classical Kullback-Leibler divergence of p from g (expectation under p)
/// for continuous densities: the alpha family's alpha -> 1 limit.
pub fn kl_divergence_continuous(
    log_p: impl Fn(f64) -> f64,
    log_g: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    Ok(integrate(|x| kl_integrand(log_p(x), log_g(x)), lo, hi, 1e-10, 1e-10)?.value)
}

/// Classical Kullback-Leibler divergence of p from g on the integers.
pub fn kl_divergence_discrete(
    log_p: impl Fn(u64) -> f64,
    log_g: impl Fn(u64) -> f64,
) -> Result<f64> {
    sum_over_integers(|k| kl_integrand(log_p(k), log_g(k)))
}
