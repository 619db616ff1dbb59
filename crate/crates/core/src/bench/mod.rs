//! Nonlinear system-identification benchmark: plant, datasets, Monte Carlo
//! trials and CSV artifacts.

pub mod config;
pub mod dataset;
pub mod experiment;
pub mod output;
pub mod plant;

pub use config::{ExperimentConfig, ExperimentFile};
pub use dataset::{make_dataset, Dataset, Sample};
pub use experiment::{average_trials, run_experiment, run_on_dataset, run_trial, LearningCurve, TrialResult};
pub use output::{curve_csv, samples_csv, write_atomic, RunMetadata, CURVE_HEADER};
pub use plant::{plant_output, PlantConfig, DEFAULT_FIR_TAPS};
