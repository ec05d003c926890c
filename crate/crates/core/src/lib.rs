//! Generalized Bayesian belief updates with f-divergence losses.

pub mod bayesopt;
pub mod belief;
pub mod classifier;
pub mod density;
pub mod divergence;
pub mod gp;
pub mod harness;
pub mod optim;
pub mod quad;
pub mod rng;
pub mod stats;

pub use bayesopt::{run_bayesopt, ucb, AcquisitionTrace, BoConfig, LogRatioRecord};
pub use belief::{
    belief_from_losses, generative_belief, surrogate_belief, total_variation, true_belief,
    BeliefGrid, GenerativeMode, ParamGrid,
};
pub use classifier::{
    decision_function, estimate_log_ratio, fit_logistic, FitMethod, LogisticModel, RatioEstimate,
};
pub use density::{fit_kde, generative_log_ratio, GenerativeModel, KdeModel, SupervisedGenModel};
pub use divergence::{DivergenceKind, DivergenceSpec};
pub use gp::{fit_gp, lml_and_gradient, GpModel, KernelConfig};
pub use harness::{
    jsd, run_experiment, run_experiment_observed, ExperimentConfig, Method, ResultRow, ResultTable,
    RunObserver, JSD_BOUND,
};
pub use rng::RngStream;
pub use stats::{
    log_densities_model, log_densities_true, simulate_model, simulate_true, summaries, Dataset,
    ModelFamily, ProblemSpec, TrueProcess,
};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value violates a documented invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A parameter vector lies outside the problem's declared bounds.
    #[error("parameter out of bounds: {0}")]
    OutOfBounds(String),

    /// A reference sample is too degenerate to standardize against.
    #[error("degenerate reference sample: {0}")]
    DegenerateReference(String),

    /// An operation that needs at least one element received none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// An iterative fit exhausted its iteration budget.
    #[error("{method} did not converge after {iterations} iterations (last relative change {last_change:.3e})")]
    Convergence {
        method: &'static str,
        iterations: usize,
        last_change: f64,
    },

    /// A linear-algebra or quadrature step broke down numerically.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Every grid point underflowed to zero mass; no belief can be normalized.
    #[error("degenerate belief: all grid points carry zero mass")]
    DegenerateBelief,

    /// Two grids that must be identical differ.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The acquisition loop failed partway; the work done so far rides along.
    #[error("acquisition step {step} failed: {source}")]
    Acquisition {
        step: usize,
        #[source]
        source: Box<Error>,
        partial: Box<bayesopt::AcquisitionTrace>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
