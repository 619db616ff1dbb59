//! CSV and metadata artifacts.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::bench::config::ExperimentConfig;
use crate::bench::experiment::LearningCurve;
use crate::error::{Error, Result};
use crate::noise::RNG_ALGORITHM;

pub const CURVE_HEADER: &str = "iteration,test_mse,network_size,lambda_mean";

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Learning curve as CSV. Floats use the shortest exact representation so
/// equal curves always produce equal bytes.
pub fn curve_csv(curve: &LearningCurve) -> String {
    let mut out = String::with_capacity(32 * (curve.iterations.len() + 1));
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for i in 0..curve.iterations.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            curve.iterations[i], curve.test_mse[i], curve.network_size[i], curve.lambda_mean[i]
        ));
    }
    out
}

/// Raw noise draws as `index,value` CSV.
pub fn samples_csv(values: &[f64]) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out
}

#[derive(Debug, Serialize)]
pub struct RunMetadata<'a> {
    pub experiment: &'a str,
    pub label: &'a str,
    pub config_hash: String,
    pub seed: u64,
    pub rng: &'static str,
    pub trials: usize,
    pub trials_used: usize,
    pub diverged_trials: &'a [u64],
    pub wall_clock_seconds: f64,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
}

impl<'a> RunMetadata<'a> {
    pub fn new(
        experiment: &'a str,
        label: &'a str,
        cfg: &'a ExperimentConfig,
        curve: &'a LearningCurve,
        wall_clock_seconds: f64,
    ) -> Self {
        Self {
            experiment,
            label,
            config_hash: cfg.hash(),
            seed: cfg.seed,
            rng: RNG_ALGORITHM,
            trials: cfg.trials,
            trials_used: curve.trials_used(),
            diverged_trials: &curve.diverged_trials,
            wall_clock_seconds,
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serializes");
        s.push('\n');
        s
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory and an atomic rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, format!("output directory not writable: {e}")))?;
    tmp.write_all(contents).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::experiment::average_trials;
    use crate::bench::experiment::TrialResult;

    fn curve() -> LearningCurve {
        let t = TrialResult {
            stream_id: 0,
            iterations: vec![0, 10],
            test_mse: vec![0.5, 0.1],
            network_size: vec![0, 10],
            lambda: vec![0.5, 0.25],
            lambda_trace: vec![],
            size_trace: vec![],
            diverged_at: None,
        };
        average_trials(vec![t]).unwrap()
    }

    #[test]
    fn csv_layout() {
        assert_eq!(
            curve_csv(&curve()),
            "iteration,test_mse,network_size,lambda_mean\n0,0.5,0,0.5\n10,0.1,10,0.25\n"
        );
        assert_eq!(samples_csv(&[1.5, -2.0]), "index,value\n0,1.5\n1,-2\n");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn atomic_write_reports_missing_directory() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("missing").join("out.csv");
        let err = write_atomic(&p, b"x").unwrap_err();
        assert!(err.to_string().contains("not writable"), "{err}");
        assert!(!p.exists());
    }
}
