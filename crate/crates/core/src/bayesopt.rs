//! Upper-confidence-bound search over the parameter space.
//!
//! The expensive evaluator (a classifier run or a generative ratio) is called
//! at a small set of space-filling initial points, a Gaussian process is
//! fitted to the mean log ratios, and each subsequent point maximizes
//! `mean + beta * sd` over a fresh low-discrepancy candidate batch plus every
//! previously visited point. The whole search is deterministic given its
//! random stream.

use crate::gp::{fit_gp, GpModel, KernelConfig};
use crate::rng::RngStream;
use crate::{Error, Result};
use nalgebra::DMatrix;
use rand::Rng;

/// One evaluated parameter point.
#[derive(Clone, Debug)]
pub struct LogRatioRecord {
    pub theta: Vec<f64>,
    /// Per-observation log ratios from the evaluator, original data order.
    pub per_point: Vec<f64>,
    /// Mean log ratio (the surrogate's training target).
    pub mean: f64,
    /// Acquisition value that selected this point; NaN for initial points.
    pub ucb: f64,
}

/// Search budget and acquisition settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoConfig {
    /// Exploration weight on the predictive standard deviation.
    pub beta: f64,
    /// Space-filling evaluations before the surrogate takes over; counted
    /// inside `n_total`.
    pub n_init: usize,
    /// Total evaluator calls.
    pub n_total: usize,
    /// Fresh candidate points scored per acquisition step.
    pub candidates: usize,
}

impl Default for BoConfig {
    fn default() -> Self {
        BoConfig {
            beta: 5.0,
            n_init: 10,
            n_total: 100,
            candidates: 2048,
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_init < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 initial points to fit a surrogate, got {}",
                self.n_init
            )));
        }
        if self.n_total < self.n_init {
            return Err(Error::InvalidConfig(format!(
                "total budget {} is smaller than the initial design {}",
                self.n_total, self.n_init
            )));
        }
        if self.candidates == 0 {
            return Err(Error::InvalidConfig("candidate batch is empty".into()));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "exploration weight must be finite and nonnegative, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Evaluated search history plus the surrogate fitted to all of it.
#[derive(Clone, Debug)]
pub struct AcquisitionTrace {
    pub records: Vec<LogRatioRecord>,
    pub config: BoConfig,
    /// Fitted over every record; absent only in the partial trace attached
    /// to an acquisition error that struck before two points existed.
    pub surrogate: Option<GpModel>,
}

/// Upper confidence bound on the latent mean.
pub fn ucb(mean: f64, var: f64, beta: f64) -> f64 {
    mean + beta * var.max(0.0).sqrt()
}

/// Radical-inverse low-discrepancy coordinate.
fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

const HALTON_BASES: [u64; 3] = [2, 3, 5];

/// Low-discrepancy generator with a random rotation so different streams
/// explore different (but equally uniform) candidate sets.
struct CandidateSource {
    counter: u64,
    rotation: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

impl CandidateSource {
    fn new(bounds: &[(f64, f64)], rng: &mut RngStream) -> CandidateSource {
        CandidateSource {
            counter: 1, // radical inverse of zero is degenerate at the origin
            rotation: (0..bounds.len()).map(|_| rng.gen::<f64>()).collect(),
            bounds: bounds.to_vec(),
        }
    }

    fn next_point(&mut self) -> Vec<f64> {
        let idx = self.counter;
        self.counter += 1;
        self.bounds
            .iter()
            .enumerate()
            .map(|(d, (lo, hi))| {
                let u = (halton(idx, HALTON_BASES[d]) + self.rotation[d]).fract();
                lo + u * (hi - lo)
            })
            .collect()
    }
}

fn surrogate_inputs(records: &[LogRatioRecord], dims: usize) -> DMatrix<f64> {
    DMatrix::from_fn(records.len(), dims, |i, j| records[i].theta[j])
}

fn surrogate_targets(records: &[LogRatioRecord]) -> Vec<f64> {
    records.iter().map(|r| r.mean).collect()
}

/// Run the search. The evaluator returns per-observation log ratios at a
/// parameter point; its stream is derived from the record index, so the
/// sequence of evaluations is reproducible regardless of how candidates are
/// scored.
pub fn run_bayesopt<F>(
    mut evaluator: F,
    bounds: &[(f64, f64)],
    config: BoConfig,
    rng: &mut RngStream,
) -> Result<AcquisitionTrace>
where
    F: FnMut(&[f64], &mut RngStream) -> Result<Vec<f64>>,
{
    config.validate()?;
    if bounds.is_empty() || bounds.len() > HALTON_BASES.len() {
        return Err(Error::InvalidConfig(format!(
            "search space must have 1 to {} dimensions, got {}",
            HALTON_BASES.len(),
            bounds.len()
        )));
    }
    for (lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "invalid search bounds [{lo}, {hi}]"
            )));
        }
    }
    let dims = bounds.len();
    let mut source = CandidateSource::new(bounds, &mut rng.child("rotation"));
    let mut records: Vec<LogRatioRecord> = Vec::with_capacity(config.n_total);
    let mut surrogate: Option<GpModel> = None;

    let fail = |step: usize,
                source_err: Error,
                records: Vec<LogRatioRecord>,
                surrogate: Option<GpModel>| {
        Error::Acquisition {
            step,
            source: Box::new(source_err),
            partial: Box::new(AcquisitionTrace {
                records,
                config,
                surrogate,
            }),
        }
    };

    for step in 0..config.n_total {
        let (theta, acq) = if step < config.n_init {
            (source.next_point(), f64::NAN)
        } else {
            let gp = surrogate.as_ref().expect("fitted after the initial design");
            let mut best: Option<(f64, Vec<f64>)> = None;
            let mut consider = |theta: Vec<f64>| {
                let (mean, var) = gp.predict(&theta);
                let score = ucb(mean, var, config.beta);
                if best.as_ref().map_or(true, |(s, _)| score > *s) {
                    best = Some((score, theta));
                }
            };
            for _ in 0..config.candidates {
                consider(source.next_point());
            }
            for r in &records {
                consider(r.theta.clone());
            }
            let (score, theta) = best.expect("at least one candidate");
            (theta, score)
        };

        let mut eval_rng = rng.child_idx("eval", step as u64);
        let per_point = match evaluator(&theta, &mut eval_rng) {
            Ok(v) => v,
            Err(e) => return Err(fail(step, e, records, surrogate)),
        };
        if per_point.is_empty() || per_point.iter().any(|v| !v.is_finite()) {
            let e = Error::Numeric(format!(
                "evaluator returned a non-finite or empty log-ratio vector at {theta:?}"
            ));
            return Err(fail(step, e, records, surrogate));
        }
        let mean = per_point.iter().sum::<f64>() / per_point.len() as f64;
        records.push(LogRatioRecord {
            theta,
            per_point,
            mean,
            ucb: acq,
        });

        // Refit once the initial design is complete, then after every new
        // point: a full multi-start fit the first time, warm single starts
        // (with a fixed-hyperparameter fallback) afterwards.
        if step + 1 >= config.n_init {
            let inputs = surrogate_inputs(&records, dims);
            let targets = surrogate_targets(&records);
            let fitted = match &surrogate {
                None => fit_gp(
                    inputs.clone(),
                    targets.clone(),
                    KernelConfig::default_for(&inputs, &targets),
                ),
                Some(prev) => crate::gp::refit_warm(inputs.clone(), targets.clone(), &prev.config),
            };
            match fitted {
                Ok(gp) => surrogate = Some(gp),
                Err(e) => match &surrogate {
                    Some(prev) => {
                        log::warn!(
                            "surrogate refit failed at step {step} ({e}); keeping previous \
                             hyperparameters"
                        );
                        match GpModel::from_config(inputs, targets, prev.config.clone()) {
                            Ok(gp) => surrogate = Some(gp),
                            Err(e2) => return Err(fail(step, e2, records, surrogate)),
                        }
                    }
                    None => return Err(fail(step, e, records, surrogate)),
                },
            }
        }
    }

    Ok(AcquisitionTrace {
        records,
        config,
        surrogate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_config(n_init: usize, n_total: usize) -> BoConfig {
        BoConfig {
            beta: 5.0,
            n_init,
            n_total,
            candidates: 256,
        }
    }

    #[test]
    fn ucb_combines_mean_and_spread() {
        assert_eq!(ucb(1.0, 4.0, 5.0), 11.0);
        assert_eq!(ucb(0.7, 9.0, 0.0), 0.7);
        assert_eq!(ucb(-2.0, 0.0, 5.0), -2.0);
        // negative variance is treated as zero, not NaN
        assert_eq!(ucb(1.0, -1e-12, 5.0), 1.0);
    }

    #[test]
    fn halton_is_uniform_enough() {
        for base in HALTON_BASES {
            let pts: Vec<f64> = (1..=200).map(|i| halton(i, base)).collect();
            assert!(pts.iter().all(|p| (0.0..1.0).contains(p)));
            let mean = pts.iter().sum::<f64>() / pts.len() as f64;
            assert!((mean - 0.5).abs() < 0.05, "base {base}: mean {mean}");
        }
    }

    #[test]
    fn finds_a_quadratic_peak() {
        let mut rng = RngStream::from_seed(1);
        let trace = run_bayesopt(
            |theta, _| {
                let v = -(theta[0] - 0.7) * (theta[0] - 0.7);
                Ok(vec![v; 3])
            },
            &[(0.0, 1.0)],
            unit_config(5, 25),
            &mut rng,
        )
        .unwrap();
        let best = trace
            .records
            .iter()
            .max_by(|a, b| a.mean.total_cmp(&b.mean))
            .unwrap();
        assert!(
            (best.theta[0] - 0.7).abs() < 0.05,
            "best point {}",
            best.theta[0]
        );
    }

    #[test]
    fn respects_bounds_and_budget() {
        let mut rng = RngStream::from_seed(2);
        let bounds = [(-2.0, 3.0), (10.0, 11.0)];
        let trace = run_bayesopt(
            |theta, _| Ok(vec![theta[0].sin() + theta[1]]),
            &bounds,
            unit_config(4, 16),
            &mut rng,
        )
        .unwrap();
        assert_eq!(trace.records.len(), 16);
        for r in &trace.records {
            for (d, (lo, hi)) in bounds.iter().enumerate() {
                assert!((lo..=hi).contains(&&r.theta[d]), "theta {:?}", r.theta);
            }
        }
        assert!(trace.surrogate.is_some());
        assert_eq!(trace.surrogate.as_ref().unwrap().n_train(), 16);
    }

    #[test]
    fn initial_points_have_no_acquisition_value() {
        let mut rng = RngStream::from_seed(3);
        let trace = run_bayesopt(
            |theta, _| Ok(vec![theta[0]]),
            &[(0.0, 1.0)],
            unit_config(6, 12),
            &mut rng,
        )
        .unwrap();
        for (i, r) in trace.records.iter().enumerate() {
            if i < 6 {
                assert!(r.ucb.is_nan(), "init point {i} has ucb {}", r.ucb);
            } else {
                assert!(r.ucb.is_finite(), "acquired point {i} has ucb {}", r.ucb);
            }
        }
    }

    #[test]
    fn all_init_budget_means_no_acquisition() {
        let mut rng = RngStream::from_seed(4);
        let trace = run_bayesopt(
            |theta, _| Ok(vec![theta[0]]),
            &[(0.0, 1.0)],
            unit_config(8, 8),
            &mut rng,
        )
        .unwrap();
        assert_eq!(trace.records.len(), 8);
        assert!(trace.records.iter().all(|r| r.ucb.is_nan()));
        assert!(trace.surrogate.is_some());
    }

    #[test]
    fn near_flat_objective_keeps_exploring() {
        // A ripple far below the exploration bonus: acquisition is dominated
        // by predictive spread. (An exactly constant objective degenerates
        // the surrogate fit itself, so it would test nothing about search.)
        let mut rng = RngStream::from_seed(5);
        let trace = run_bayesopt(
            |theta, _| Ok(vec![0.1 * (20.0 * theta[0]).sin()]),
            &[(0.0, 1.0)],
            unit_config(5, 25),
            &mut rng,
        )
        .unwrap();
        // Uncertainty-driven acquisition should roughly tile the interval.
        let mut xs: Vec<f64> = trace.records.iter().map(|r| r.theta[0]).collect();
        xs.sort_by(f64::total_cmp);
        let max_gap = xs
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(xs[0].max(1.0 - xs[xs.len() - 1]), f64::max);
        assert!(max_gap < 0.25, "largest unexplored gap {max_gap}");
    }

    #[test]
    fn search_is_deterministic() {
        let run = || {
            let mut rng = RngStream::from_seed(6);
            run_bayesopt(
                |theta, r| Ok(vec![-(theta[0] - 0.3).abs() + 0.01 * r.gen::<f64>()]),
                &[(0.0, 1.0)],
                unit_config(4, 14),
                &mut rng,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.theta, rb.theta);
            assert_eq!(ra.mean.to_bits(), rb.mean.to_bits());
        }
    }

    #[test]
    fn evaluator_failure_carries_partial_trace() {
        let mut rng = RngStream::from_seed(7);
        let err = run_bayesopt(
            |theta, _| {
                if theta[0] >= 0.0 {
                    // fail on the 8th call regardless of location
                    Ok(vec![theta[0]])
                } else {
                    unreachable!()
                }
            },
            &[(0.0, 1.0)],
            unit_config(3, 10),
            &mut rng,
        );
        assert!(err.is_ok());
        let mut calls = 0;
        let mut rng = RngStream::from_seed(7);
        let err = run_bayesopt(
            |theta, _| {
                calls += 1;
                if calls == 8 {
                    Err(Error::Numeric("synthetic evaluator failure".into()))
                } else {
                    Ok(vec![theta[0]])
                }
            },
            &[(0.0, 1.0)],
            unit_config(3, 10),
            &mut rng,
        )
        .unwrap_err();
        let Error::Acquisition { step, partial, .. } = err else {
            panic!("wrong error variant: {err}")
        };
        assert_eq!(step, 7);
        assert_eq!(partial.records.len(), 7);
        assert!(partial.surrogate.is_some());
    }

    #[test]
    fn bad_configs_rejected() {
        let mut rng = RngStream::from_seed(8);
        let eval = |theta: &[f64], _: &mut RngStream| Ok(vec![theta[0]]);
        assert!(run_bayesopt(eval, &[(0.0, 1.0)], unit_config(1, 10), &mut rng).is_err());
        assert!(run_bayesopt(eval, &[(0.0, 1.0)], unit_config(10, 5), &mut rng).is_err());
        assert!(run_bayesopt(eval, &[(1.0, 0.0)], unit_config(4, 10), &mut rng).is_err());
        assert!(run_bayesopt(eval, &[], unit_config(4, 10), &mut rng).is_err());
        let four = [(0.0, 1.0); 4];
        assert!(run_bayesopt(eval, &four, unit_config(4, 10), &mut rng).is_err());
    }

    #[test]
    fn non_finite_evaluations_rejected() {
        let mut rng = RngStream::from_seed(9);
        let err = run_bayesopt(
            |_, _| Ok(vec![f64::NAN]),
            &[(0.0, 1.0)],
            unit_config(3, 6),
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Acquisition { step: 0, .. }));
    }
}
