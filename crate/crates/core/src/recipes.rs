//! Figure recipes: which shipped config reproduces which learning-curve
//! figure, what it should show, and a validator that runs them all.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::bench::{curve_csv, run_experiment, ExperimentFile, LearningCurve};

/// What a shipped config is expected to reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FigureRecipe {
    pub figure: &'static str,
    /// Config path relative to the `configs/<scale>/` directory.
    pub config: &'static str,
    pub expected: &'static str,
    /// Rough desk-scale runtime on one core.
    pub desk_runtime: &'static str,
    /// Every run's mean network size must be nondecreasing.
    pub check_growth: bool,
}

pub const RECIPES: &[FigureRecipe] = &[
    FigureRecipe {
        figure: "fig3",
        config: "fig3.toml",
        expected: "Algorithm 1 converges faster with gamma = 5e-5 than 1e-5; Algorithm 2 faster with theta = 0.01 than 0.05.",
        desk_runtime: "5 s",
        check_growth: false,
    },
    FigureRecipe {
        figure: "fig4",
        config: "fig4.toml",
        expected: "Steady-state MSE ordering VPKRMN-2 <= VPKRMN-1 < KRMN(0.3) < KLMS; KLAD slowest.",
        desk_runtime: "5 s",
        check_growth: false,
    },
    FigureRecipe {
        figure: "fig5",
        config: "fig5.toml",
        expected: "QVPKRMN below QKLMS and slightly above the unquantized VPKRMN filters.",
        desk_runtime: "4 s",
        check_growth: false,
    },
    FigureRecipe {
        figure: "fig6",
        config: "fig6.toml",
        expected: "Quantized network size levels off near 13% of the training length; unquantized grows linearly.",
        desk_runtime: "3 s",
        check_growth: true,
    },
    FigureRecipe {
        figure: "fig7",
        config: "fig7.toml",
        expected: "Performance is sensitive to gamma and theta; gamma = 3e-4 and theta = 0.01 are the better settings.",
        desk_runtime: "5 s",
        check_growth: false,
    },
    FigureRecipe {
        figure: "fig8",
        config: "fig8.toml",
        expected: "Linear filters far above every kernel filter; VPKRMN filters below KLMS.",
        desk_runtime: "5 s",
        check_growth: false,
    },
    FigureRecipe {
        figure: "fig9",
        config: "fig9.toml",
        expected: "QVPKRMN-2 below QKLMS; quantized filters slightly above their unquantized counterparts.",
        desk_runtime: "5 s",
        check_growth: false,
    },
    FigureRecipe {
        figure: "fig10",
        config: "fig10.toml",
        expected: "Quantized network size levels off near 13% of the training length.",
        desk_runtime: "3 s",
        check_growth: true,
    },
];

/// Result of validating one recipe.
#[derive(Debug, Clone)]
pub struct RecipeOutcome {
    pub figure: String,
    pub config: PathBuf,
    pub passed: bool,
    pub message: String,
    /// `(label, curve)` per run, present when the config ran.
    pub curves: Vec<(String, LearningCurve)>,
    pub seconds: f64,
}

impl RecipeOutcome {
    /// Curve CSVs in run order.
    pub fn csvs(&self) -> Vec<(String, String)> {
        self.curves.iter().map(|(l, c)| (l.clone(), curve_csv(c))).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RecipeReport {
    pub outcomes: Vec<RecipeOutcome>,
}

impl RecipeReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> Vec<&RecipeOutcome> {
        self.outcomes.iter().filter(|o| !o.passed).collect()
    }

    /// One `PASS`/`FAIL` line per recipe.
    pub fn summary(&self) -> String {
        self.outcomes
            .iter()
            .map(|o| {
                format!(
                    "{} {:<6} {} ({:.1} s){}\n",
                    if o.passed { "PASS" } else { "FAIL" },
                    o.figure,
                    o.config.display(),
                    o.seconds,
                    if o.message.is_empty() { String::new() } else { format!(": {}", o.message) }
                )
            })
            .collect()
    }
}

fn validate_one(recipe: &FigureRecipe, dir: &Path) -> RecipeOutcome {
    let start = Instant::now();
    let config = dir.join(recipe.config);
    let mut outcome = RecipeOutcome {
        figure: recipe.figure.to_owned(),
        config: config.clone(),
        passed: false,
        message: String::new(),
        curves: Vec::new(),
        seconds: 0.0,
    };
    let file = match ExperimentFile::load(&config) {
        Ok(f) => f,
        Err(e) => {
            outcome.message = e.to_string();
            outcome.seconds = start.elapsed().as_secs_f64();
            return outcome;
        }
    };
    let mut problems = Vec::new();
    for (label, cfg) in &file.runs {
        match run_experiment(cfg) {
            Ok(curve) => {
                if recipe.check_growth && curve.network_size.windows(2).any(|w| w[1] < w[0]) {
                    problems.push(format!("{label}: network size decreases"));
                }
                outcome.curves.push((label.clone(), curve));
            }
            Err(e) => problems.push(format!("{label}: {e}")),
        }
    }
    outcome.passed = problems.is_empty();
    outcome.message = problems.join("; ");
    outcome.seconds = start.elapsed().as_secs_f64();
    outcome
}

/// Parses and runs every recipe's config from `dir`.
pub fn validate_recipes_in(dir: &Path, recipes: &[FigureRecipe]) -> RecipeReport {
    RecipeReport {
        outcomes: recipes.iter().map(|r| validate_one(r, dir)).collect(),
    }
}

/// Validates all shipped recipes against the desk-scale configs under
/// `root/configs/desk`.
pub fn validate_recipes(root: &Path) -> RecipeReport {
    validate_recipes_in(&root.join("configs").join("desk"), RECIPES)
}
