//! Declarative run configuration: a TOML file mirroring the experiment
//! config one key per field, plus dotted-path command-line overrides.

use robust_belief::{
    BoConfig, DivergenceKind, DivergenceSpec, ExperimentConfig, Method, ProblemSpec,
};
use serde::{Deserialize, Serialize};

/// Seed specification: a count (seeds 0..n) or an explicit list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Count(u64),
    List(Vec<u64>),
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec::Count(50)
    }
}

impl SeedSpec {
    fn resolve(&self) -> Vec<u64> {
        match self {
            SeedSpec::Count(n) => (0..*n).collect(),
            SeedSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesOptSection {
    #[serde(default = "d_beta")]
    pub beta: f64,
    #[serde(default = "d_n_init")]
    pub n_init: usize,
    #[serde(default = "d_n_total")]
    pub n_total: usize,
    #[serde(default = "d_candidates")]
    pub candidates: usize,
}

fn d_beta() -> f64 {
    5.0
}
fn d_n_init() -> usize {
    10
}
fn d_n_total() -> usize {
    100
}
fn d_candidates() -> usize {
    2048
}

impl Default for BayesOptSection {
    fn default() -> Self {
        BayesOptSection {
            beta: d_beta(),
            n_init: d_n_init(),
            n_total: d_n_total(),
            candidates: d_candidates(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdeSection {
    /// Renormalize count-data density fits over the integer lattice.
    #[serde(default)]
    pub lattice_normalize: bool,
}

/// Stabilization truncation for surrogate-smoothed log ratios.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClampSection {
    pub lo: f64,
    pub hi: f64,
}

/// Optional overrides of the problem's parameter grid.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub sizes: Option<Vec<usize>>,
    pub bounds: Option<Vec<[f64; 2]>>,
}

fn d_n_obs() -> usize {
    90
}
fn d_folds() -> usize {
    10
}
fn d_tempering() -> f64 {
    1.0
}
fn d_divergences() -> Vec<String> {
    DivergenceSpec::standard_set()
        .iter()
        .map(|d| d.name())
        .collect()
}
fn d_methods() -> Vec<String> {
    Method::all().iter().map(|m| m.name().to_string()).collect()
}

/// On-disk run description. Every field has the benchmark default, so a
/// minimal file only names the problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: String,
    #[serde(default = "d_n_obs")]
    pub n_obs: usize,
    #[serde(default = "d_folds")]
    pub folds: usize,
    #[serde(default = "d_tempering")]
    pub tempering: f64,
    #[serde(default)]
    pub seeds: SeedSpec,
    #[serde(default = "d_divergences")]
    pub divergences: Vec<String>,
    #[serde(default = "d_methods")]
    pub methods: Vec<String>,
    #[serde(default)]
    pub rebuild_trace_per_divergence: bool,
    #[serde(default)]
    pub bayesopt: BayesOptSection,
    #[serde(default)]
    pub kde: KdeSection,
    pub clamp: Option<ClampSection>,
    pub grid: Option<GridSection>,
}

impl FileConfig {
    /// Check every invariant and build the runnable config. All violations
    /// are collected, not just the first.
    pub fn resolve(&self) -> Result<ExperimentConfig, Vec<String>> {
        let mut violations = Vec::new();

        let mut problem = match ProblemSpec::by_label(&self.problem) {
            Ok(p) => Some(p),
            Err(e) => {
                violations.push(e.to_string());
                None
            }
        };

        if let (Some(p), Some(grid)) = (problem.as_mut(), &self.grid) {
            if let Some(sizes) = &grid.sizes {
                if sizes.len() != p.dim() {
                    violations.push(format!(
                        "grid.sizes has {} entries for a {}-parameter problem",
                        sizes.len(),
                        p.dim()
                    ));
                } else if sizes.iter().any(|s| *s == 0) {
                    violations.push("grid.sizes entries must be at least 1".into());
                } else {
                    p.grid_sizes = sizes.clone();
                }
            }
            if let Some(bounds) = &grid.bounds {
                if bounds.len() != p.dim() {
                    violations.push(format!(
                        "grid.bounds has {} entries for a {}-parameter problem",
                        bounds.len(),
                        p.dim()
                    ));
                } else if bounds.iter().any(|b| !(b[0] < b[1])) {
                    violations.push("grid.bounds entries must satisfy lo < hi".into());
                } else {
                    p.param_bounds = bounds.iter().map(|b| (b[0], b[1])).collect();
                }
            }
        }

        let mut divergences = Vec::new();
        for name in &self.divergences {
            match DivergenceSpec::by_name(name) {
                Ok(mut d) => {
                    if let Some(c) = &self.clamp {
                        // Total variation's upper cap at zero is part of the
                        // estimator, not a stabilization choice; only the
                        // lower truncation is adjustable for it.
                        let hi = if d.kind == DivergenceKind::Tvd {
                            d.clamp_hi
                        } else {
                            c.hi
                        };
                        d = d.with_clamp(c.lo, hi);
                    }
                    match d.validate() {
                        Ok(()) => divergences.push(d),
                        Err(e) => violations.push(format!("divergence '{name}': {e}")),
                    }
                }
                Err(e) => violations.push(e.to_string()),
            }
        }

        let mut methods = Vec::new();
        for name in &self.methods {
            match Method::by_name(name) {
                Ok(m) => methods.push(m),
                Err(e) => violations.push(e.to_string()),
            }
        }

        let seeds = self.seeds.resolve();
        if seeds.is_empty() {
            violations.push("seed list is empty".into());
        }

        if self.n_obs == 0 {
            violations.push("n_obs must be positive".into());
        }
        let uses_classifier = methods.iter().any(|m| m.classifier_fit().is_some());
        if uses_classifier {
            if self.folds < 2 || self.folds > self.n_obs {
                violations.push(format!(
                    "folds = {} must lie in [2, n_obs = {}]",
                    self.folds, self.n_obs
                ));
            } else if self.n_obs % self.folds != 0 {
                violations.push(format!(
                    "n_obs = {} is not divisible by folds = {}",
                    self.n_obs, self.folds
                ));
            }
        }

        let bo = BoConfig {
            beta: self.bayesopt.beta,
            n_init: self.bayesopt.n_init,
            n_total: self.bayesopt.n_total,
            candidates: self.bayesopt.candidates,
        };
        if let Err(e) = bo.validate() {
            violations.push(e.to_string());
        }

        if !self.tempering.is_finite() || self.tempering <= 0.0 {
            violations.push(format!(
                "tempering must be positive and finite, got {}",
                self.tempering
            ));
        }

        let Some(problem) = problem else {
            return Err(violations);
        };
        if !violations.is_empty() {
            return Err(violations);
        }

        let config = ExperimentConfig {
            problem,
            divergences,
            methods,
            seeds,
            n_obs: self.n_obs,
            folds: self.folds,
            bo,
            tempering: self.tempering,
            rebuild_trace_per_divergence: self.rebuild_trace_per_divergence,
            lattice_normalize_kde: self.kde.lattice_normalize,
        };
        match config.validate() {
            Ok(()) => Ok(config),
            Err(e) => Err(vec![e.to_string()]),
        }
    }
}

/// Apply one `key=value` override to the parsed TOML tree. The key may be a
/// dotted path; the value is parsed as TOML, falling back to a plain string.
pub fn apply_override(tree: &mut toml::Table, spec: &str) -> Result<(), String> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("override '{spec}' is not of the form key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(format!("override '{spec}' has an empty key"));
    }
    let value: toml::Value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("just inserted"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        node = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| format!("override path '{key}' crosses a non-table value"))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Parse file contents plus overrides into the resolved TOML echo and the
/// typed config.
pub fn parse_with_overrides(
    contents: &str,
    overrides: &[String],
    seeds_flag: Option<u64>,
) -> Result<(String, FileConfig), String> {
    let mut tree: toml::Table = contents
        .parse()
        .map_err(|e| format!("config parse error: {e}"))?;
    for spec in overrides {
        apply_override(&mut tree, spec)?;
    }
    if let Some(n) = seeds_flag {
        tree.insert("seeds".into(), toml::Value::Integer(n as i64));
    }
    let echo = toml::to_string_pretty(&tree).map_err(|e| format!("config echo error: {e}"))?;
    let file: FileConfig = tree
        .try_into()
        .map_err(|e| format!("config field error: {e}"))?;
    Ok((echo, file))
}
