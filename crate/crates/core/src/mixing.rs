//! Mixing-parameter adaptation for the robust mixed-norm filters.
//!
//! The mixing parameter `lambda` weights the squared-error and absolute-error
//! terms of the cost `lambda * E[e^2] + (1 - lambda) * E[|e|]`. It is either
//! held fixed or adapted online by one of two rules:
//!
//! ```text
//! rule 1:  lambda <- lambda + gamma * (|e| - e^2)
//! rule 2:  p      <- beta * p + (1 - beta) * e * e_prev
//!          lambda <- delta * lambda + theta * p^2
//! ```
//!
//! Every update is followed by clamping `lambda` to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Initial mixing parameter for the adaptive rules.
pub const INITIAL_LAMBDA: f64 = 0.5;

/// How `lambda` evolves over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MixingRule {
    Fixed,
    /// Gradient-style rule driven by `|e| - e^2`.
    Alg1 { gamma: f64 },
    /// Error-autocorrelation rule.
    Alg2 { delta: f64, theta: f64, beta: f64 },
}

impl MixingRule {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must lie in [0, 1], got {x}")))
            }
        };
        let nonneg = |name: &str, x: f64| {
            if x >= 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be nonnegative, got {x}")))
            }
        };
        match *self {
            MixingRule::Fixed => Ok(()),
            MixingRule::Alg1 { gamma } => nonneg("gamma", gamma),
            MixingRule::Alg2 { delta, theta, beta } => {
                unit("delta", delta)?;
                unit("beta", beta)?;
                nonneg("theta", theta)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingState {
    lambda: f64,
    /// Low-pass estimate of `e(n) e(n-1)`; only rule 2 touches it.
    p: f64,
    rule: MixingRule,
}

impl MixingState {
    pub fn new(rule: MixingRule, initial_lambda: f64) -> Result<Self> {
        rule.validate()?;
        if !(0.0..=1.0).contains(&initial_lambda) {
            return Err(Error::invalid(format!(
                "mixing parameter must lie in [0, 1], got {initial_lambda}"
            )));
        }
        Ok(Self {
            lambda: initial_lambda,
            p: 0.0,
            rule,
        })
    }

    pub fn fixed(lambda: f64) -> Result<Self> {
        Self::new(MixingRule::Fixed, lambda)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn rule(&self) -> MixingRule {
        self.rule
    }

    /// Advances `lambda` after an error `e` has been observed. `e_prev` is the
    /// error of the previous iteration (zero before the first one).
    pub fn update(&mut self, e: f64, e_prev: f64) {
        match self.rule {
            MixingRule::Fixed => {}
            MixingRule::Alg1 { gamma } => self.update_alg1(gamma, e),
            MixingRule::Alg2 { delta, theta, beta } => {
                self.update_alg2(delta, theta, beta, e, e_prev)
            }
        }
    }

    fn update_alg1(&mut self, gamma: f64, e: f64) {
        self.lambda = clamp_unit(self.lambda + gamma * (e.abs() - e * e));
    }

    fn update_alg2(&mut self, delta: f64, theta: f64, beta: f64, e: f64, e_prev: f64) {
        self.p = beta * self.p + (1.0 - beta) * e * e_prev;
        self.lambda = clamp_unit(delta * self.lambda + theta * self.p * self.p);
    }
}

fn clamp_unit(x: f64) -> f64 {
    // NaN maps to 0 so a single corrupt error cannot poison the state.
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

/// Sample estimate of the mixed-norm cost `lambda * mean(e^2) + (1 - lambda) * mean(|e|)`.
pub fn mixed_norm_cost(errors: &[f64], lambda: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::invalid("mixed-norm cost needs at least one error"));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!("mixing parameter must lie in [0, 1], got {lambda}")));
    }
    let n = errors.len() as f64;
    let ms = errors.iter().map(|e| e * e).sum::<f64>() / n;
    let ma = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
    Ok(lambda * ms + (1.0 - lambda) * ma)
}
