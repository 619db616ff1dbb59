//! Experiment configuration and the TOML experiment-file format.
//!
//! An experiment file shares the data, noise and Monte Carlo settings across
//! a list of `[[filters]]`, each of which becomes one [`ExperimentConfig`]
//! and one output curve. Unknown keys are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::plant::PlantConfig;
use crate::error::{Error, Result};
use crate::filters::FilterConfig;
use crate::noise::{snr_to_dispersion, BgParams, NoiseModel, SasParams, RNG_ALGORITHM};

pub const DESK_TRAIN_LEN: usize = 3000;
pub const DESK_TEST_LEN: usize = 500;
pub const DESK_TRIALS: usize = 10;
pub const FULL_TRAIN_LEN: usize = 15000;
pub const FULL_TEST_LEN: usize = 1000;
pub const FULL_TRIALS: usize = 50;
pub const DEFAULT_EMBED_DIM: usize = 9;
pub const DEFAULT_EVAL_EVERY: usize = 10;
pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e8;

/// Everything needed to reproduce one learning curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub filter: FilterConfig,
    pub plant: PlantConfig,
    pub noise: NoiseModel,
    pub train_len: usize,
    pub test_len: usize,
    pub trials: usize,
    pub seed: u64,
    pub embed_dim: usize,
    pub eval_every: usize,
    /// Add noise to test targets as well as training targets.
    pub noisy_test: bool,
    /// Test MSE above this (or non-finite) marks a trial as diverged.
    pub divergence_threshold: f64,
}

impl ExperimentConfig {
    /// Desk-scale defaults around `filter`, noise free.
    pub fn new(filter: FilterConfig) -> Self {
        Self {
            filter,
            plant: PlantConfig::default(),
            noise: NoiseModel::None,
            train_len: DESK_TRAIN_LEN,
            test_len: DESK_TEST_LEN,
            trials: DESK_TRIALS,
            seed: 0,
            embed_dim: DEFAULT_EMBED_DIM,
            eval_every: DEFAULT_EVAL_EVERY,
            noisy_test: false,
            divergence_threshold: DEFAULT_DIVERGENCE_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        self.plant.validate()?;
        self.noise.validate()?;
        for (field, v) in [
            ("train_len", self.train_len),
            ("test_len", self.test_len),
            ("trials", self.trials),
            ("embed_dim", self.embed_dim),
            ("eval_every", self.eval_every),
        ] {
            if v == 0 {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::config("divergence_threshold", "must be positive"));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Noise section as written in experiment files. The alpha-stable model may
/// give its dispersion directly or as an SNR in dB against the input variance.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
enum NoiseSpec {
    None,
    Bg {
        impulse_prob: f64,
        sigma_impulse: f64,
        sigma_gauss: f64,
    },
    Sas {
        alpha: f64,
        dispersion: Option<f64>,
        snr_db: Option<f64>,
    },
}

impl NoiseSpec {
    fn resolve(self, input_variance: f64) -> Result<NoiseModel> {
        let model = match self {
            NoiseSpec::None => NoiseModel::None,
            NoiseSpec::Bg { impulse_prob, sigma_impulse, sigma_gauss } => NoiseModel::Bg(BgParams {
                impulse_prob,
                sigma_impulse,
                sigma_gauss,
            }),
            NoiseSpec::Sas { alpha, dispersion, snr_db } => {
                let dispersion = match (dispersion, snr_db) {
                    (Some(m), None) => m,
                    (None, Some(snr)) => snr_to_dispersion(snr, input_variance)
                        .map_err(|e| Error::config("noise.snr_db", e.to_string()))?,
                    _ => {
                        return Err(Error::config(
                            "noise",
                            "alpha-stable noise needs exactly one of `dispersion` or `snr_db`",
                        ))
                    }
                };
                NoiseModel::Sas(SasParams { alpha, dispersion })
            }
        };
        model.validate()?;
        Ok(model)
    }
}

fn default_rng() -> String {
    RNG_ALGORITHM.to_owned()
}
fn default_train_len() -> usize {
    DESK_TRAIN_LEN
}
fn default_test_len() -> usize {
    DESK_TEST_LEN
}
fn default_trials() -> usize {
    DESK_TRIALS
}
fn default_embed_dim() -> usize {
    DEFAULT_EMBED_DIM
}
fn default_eval_every() -> usize {
    DEFAULT_EVAL_EVERY
}
fn default_divergence_threshold() -> f64 {
    DEFAULT_DIVERGENCE_THRESHOLD
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    name: String,
    #[serde(default)]
    description: String,
    seed: u64,
    #[serde(default = "default_rng")]
    rng: String,
    #[serde(default = "default_train_len")]
    train_len: usize,
    #[serde(default = "default_test_len")]
    test_len: usize,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_embed_dim")]
    embed_dim: usize,
    #[serde(default = "default_eval_every")]
    eval_every: usize,
    #[serde(default)]
    noisy_test: bool,
    #[serde(default = "default_divergence_threshold")]
    divergence_threshold: f64,
    #[serde(default)]
    plant: PlantConfig,
    noise: NoiseSpec,
    filters: Vec<toml::Table>,
}

/// A parsed experiment file: one named figure setup with several filters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentFile {
    pub name: String,
    pub description: String,
    /// `(label, config)` per filter, in file order.
    pub runs: Vec<(String, ExperimentConfig)>,
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .and_then(|s| text.get(s))
                .map(|s| s.trim().to_owned())
                .filter(|s| !s.is_empty() && s.len() < 60)
                .unwrap_or_else(|| "<document>".to_owned());
            Error::config(field, e.message().to_owned())
        })?;
        if raw.rng != RNG_ALGORITHM {
            return Err(Error::config(
                "rng",
                format!("unsupported generator `{}`; only `{RNG_ALGORITHM}` is available", raw.rng),
            ));
        }
        if raw.filters.is_empty() {
            return Err(Error::config("filters", "at least one [[filters]] entry is required"));
        }
        let noise = raw.noise.resolve(raw.plant.input_variance)?;

        let mut runs: Vec<(String, ExperimentConfig)> = Vec::new();
        for (i, mut table) in raw.filters.into_iter().enumerate() {
            let label = match table.remove("label") {
                Some(toml::Value::String(s)) if !s.is_empty() => s,
                Some(_) => return Err(Error::config(format!("filters[{i}].label"), "must be a nonempty string")),
                None => return Err(Error::config(format!("filters[{i}].label"), "missing")),
            };
            if !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(Error::config(
                    format!("filters[{i}].label"),
                    format!("`{label}` may only contain letters, digits, `-` and `_`"),
                ));
            }
            if runs.iter().any(|(l, _)| *l == label) {
                return Err(Error::config(format!("filters[{i}].label"), format!("duplicate label `{label}`")));
            }
            let filter: FilterConfig = toml::Value::Table(table)
                .try_into()
                .map_err(|e: toml::de::Error| Error::config(format!("filters[{i}]"), e.message().to_owned()))?;
            let cfg = ExperimentConfig {
                filter,
                plant: raw.plant.clone(),
                noise,
                train_len: raw.train_len,
                test_len: raw.test_len,
                trials: raw.trials,
                seed: raw.seed,
                embed_dim: raw.embed_dim,
                eval_every: raw.eval_every,
                noisy_test: raw.noisy_test,
                divergence_threshold: raw.divergence_threshold,
            };
            cfg.validate().map_err(|e| match e {
                Error::Config { field, message } if field.starts_with("filter.") => Error::Config {
                    field: format!("filters[{i}].{}", &field["filter.".len()..]),
                    message,
                },
                other => other,
            })?;
            runs.push((label, cfg));
        }
        Ok(Self {
            name: raw.name,
            description: raw.description,
            runs,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text)
    }

    /// Rescales every run to the full published setup: 15000 training
    /// samples, 1000 test samples and 50 trials.
    pub fn to_full_scale(mut self) -> Self {
        for (_, cfg) in &mut self.runs {
            cfg.train_len = FULL_TRAIN_LEN;
            cfg.test_len = FULL_TEST_LEN;
            cfg.trials = FULL_TRIALS;
        }
        self
    }

    pub fn run(&self, label: &str) -> Option<&ExperimentConfig> {
        self.runs.iter().find(|(l, _)| l == label).map(|(_, c)| c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::Algorithm;
    use crate::mixing::MixingRule;

    const SAMPLE: &str = r#"
name = "demo"
seed = 42
train_len = 100
test_len = 20
trials = 2

[noise]
model = "sas"
alpha = 1.4
snr_db = 15

[[filters]]
label = "klms"
algorithm = "klms"
step_size = 0.5

[[filters]]
label = "q2"
algorithm = "qvpkrmn"
step_size = 0.5
epsilon_u = 1.0
mixing = { rule = "alg2", delta = 0.9, theta = 0.01, beta = 0.9 }
"#;

    #[test]
    fn parses_sample() {
        let f = ExperimentFile::parse(SAMPLE).unwrap();
        assert_eq!(f.name, "demo");
        assert_eq!(f.runs.len(), 2);
        let q = f.run("q2").unwrap();
        assert_eq!(q.filter.algorithm, Algorithm::Qvpkrmn);
        assert_eq!(q.filter.mixing, Some(MixingRule::Alg2 { delta: 0.9, theta: 0.01, beta: 0.9 }));
        assert_eq!(q.embed_dim, 9);
        assert_eq!(q.plant, PlantConfig::default());
        match q.noise {
            NoiseModel::Sas(p) => assert!((p.dispersion - 0.031_622_776_601_683_79).abs() < 1e-15),
            _ => panic!("expected alpha-stable noise"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let top = SAMPLE.replace("trials = 2", "trials = 2\ntrails = 3");
        assert!(ExperimentFile::parse(&top).unwrap_err().to_string().contains("trails"));
        let inner = SAMPLE.replace("step_size = 0.5\n\n[[filters]]", "step_size = 0.5\nstepsize = 1\n\n[[filters]]");
        let err = ExperimentFile::parse(&inner).unwrap_err().to_string();
        assert!(err.contains("filters[0]") && err.contains("stepsize"), "{err}");
        let mixing = SAMPLE.replace("beta = 0.9 }", "beta = 0.9, gamma = 1.0 }");
        assert!(ExperimentFile::parse(&mixing).is_err());
    }

    #[test]
    fn validation_names_field() {
        let bad = SAMPLE.replace("epsilon_u = 1.0", "epsilon_u = -1.0");
        let err = ExperimentFile::parse(&bad).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "filters[1].epsilon_u"), "{err}");
        let dup = SAMPLE.replace("label = \"q2\"", "label = \"klms\"");
        assert!(ExperimentFile::parse(&dup).unwrap_err().to_string().contains("duplicate"));
        let rng = SAMPLE.replace("seed = 42", "seed = 42\nrng = \"mt19937\"");
        assert!(ExperimentFile::parse(&rng).unwrap_err().to_string().contains("rng"));
        let both = SAMPLE.replace("snr_db = 15", "snr_db = 15\ndispersion = 0.1");
        assert!(ExperimentFile::parse(&both).is_err());
    }

    #[test]
    fn full_scale_rescales() {
        let f = ExperimentFile::parse(SAMPLE).unwrap().to_full_scale();
        for (_, c) in &f.runs {
            assert_eq!((c.train_len, c.test_len, c.trials), (15000, 1000, 50));
        }
    }

    #[test]
    fn hash_tracks_content() {
        let f = ExperimentFile::parse(SAMPLE).unwrap();
        let a = f.run("klms").unwrap();
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), f.run("q2").unwrap().hash());
        assert_eq!(a.hash().len(), 64);
    }
}
