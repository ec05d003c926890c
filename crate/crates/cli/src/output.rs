//! Output artifacts: run manifest, result tables, belief and trace dumps.
//! Every file is written to a temporary sibling and renamed into place so a
//! crash never leaves a half-written artifact behind.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use robust_belief::{AcquisitionTrace, BeliefGrid, ProblemSpec};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Write `contents` to `path` atomically (temp file + rename).
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".into());
    let tmp = dir.join(format!(".{}.tmp.{}", file_name, std::process::id()));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Record of what a run was asked to do, written before any results so a
/// partial output directory is still self-describing.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_path: String,
    pub config_sha256: String,
    pub output_dir: String,
    pub created_unix_secs: u64,
    pub resolved_config: String,
}

impl RunManifest {
    pub fn new(config_path: &Path, output_dir: &Path, resolved_config: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(resolved_config.as_bytes());
        let digest = hasher.finalize();
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        let created_unix_secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            config_path: config_path.display().to_string(),
            config_sha256,
            output_dir: output_dir.display().to_string(),
            created_unix_secs,
            resolved_config: resolved_config.to_string(),
        }
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).context("serializing manifest")?;
        write_atomic(path, &(json + "\n"))
    }
}

/// Belief grid as CSV: one column per parameter, then the density.
pub fn belief_csv(spec: &ProblemSpec, belief: &BeliefGrid) -> String {
    let mut out = String::new();
    for name in spec.param_names() {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("density\n");
    for (flat, density) in belief.density.iter().enumerate() {
        for coord in belief.grid.point(flat) {
            out.push_str(&format!("{coord:.9e},"));
        }
        out.push_str(&format!("{density:.9e}\n"));
    }
    out
}

/// Acquisition trace as CSV: step index, the probed parameter point, the
/// mean estimated log ratio there, and the acquisition value that chose it.
pub fn trace_csv(spec: &ProblemSpec, trace: &AcquisitionTrace) -> String {
    let mut out = String::from("step,");
    for name in spec.param_names() {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("mean_log_ratio,ucb\n");
    for (step, record) in trace.records.iter().enumerate() {
        out.push_str(&format!("{step},"));
        for coord in &record.theta {
            out.push_str(&format!("{coord:.9e},"));
        }
        out.push_str(&format!("{:.9e},", record.mean));
        if record.ucb.is_finite() {
            out.push_str(&format!("{:.9e}\n", record.ucb));
        } else {
            out.push_str("NA\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use robust_belief::{simulate_true, true_belief, DivergenceSpec, RngStream};

    #[test]
    fn atomic_write_replaces_existing_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name() != "a.txt")
            .collect();
        assert!(leftovers.is_empty());
    }

    #[test]
    fn manifest_hash_depends_only_on_resolved_config() {
        let a = RunManifest::new(Path::new("x.toml"), Path::new("out"), "problem = \"p\"\n");
        let b = RunManifest::new(Path::new("y.toml"), Path::new("other"), "problem = \"p\"\n");
        assert_eq!(a.config_sha256, b.config_sha256);
        let c = RunManifest::new(Path::new("x.toml"), Path::new("out"), "problem = \"q\"\n");
        assert_ne!(a.config_sha256, c.config_sha256);
    }

    #[test]
    fn belief_csv_has_one_row_per_grid_point() {
        let spec = ProblemSpec::by_label("poisson_wellspec").unwrap();
        let rng = RngStream::from_seed(0);
        let x = simulate_true(&spec, 30, &mut rng.child("observe"));
        let belief = true_belief(&spec, &DivergenceSpec::kl().unstabilized(), &x, 1.0).unwrap();
        let csv = belief_csv(&spec, &belief);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "lambda,density");
        assert_eq!(lines.len(), 1 + belief.density.len());
    }
}
