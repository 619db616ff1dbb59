//! Mean-convergence step-size bounds for the mixed-norm update.
//!
//! Replacing `E[sign(e) phi]` by `sqrt(2/pi) / sigma_e * E[e phi]` for
//! Gaussian errors turns the mean weight recursion into a linear one whose
//! contraction requires
//!
//! ```text
//! 0 < mu < 2 / ((2 lambda + (1 - lambda) sqrt(2/pi) / sigma_e) * s)
//! ```
//!
//! with `s` the largest eigenvalue of the input autocorrelation (sharp form)
//! or its trace (conservative form).

use std::f64::consts::PI;

use crate::error::{Error, Result};

fn check(lambda: f64, sigma_e: f64, scale: f64, scale_name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    if !(sigma_e > 0.0 && sigma_e.is_finite()) {
        return Err(Error::invalid(format!("sigma_e must be positive, got {sigma_e}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("{scale_name} must be positive, got {scale}")));
    }
    Ok(())
}

/// Effective gain multiplier `2 lambda + (1 - lambda) sqrt(2/pi) / sigma_e`.
pub fn effective_gain(lambda: f64, sigma_e: f64) -> f64 {
    2.0 * lambda + (1.0 - lambda) * (2.0 / PI).sqrt() / sigma_e
}

/// Conservative bound using the trace of the input autocorrelation.
pub fn stepsize_bound(lambda: f64, sigma_e: f64, trace_r: f64) -> Result<f64> {
    check(lambda, sigma_e, trace_r, "trace_r")?;
    Ok(2.0 / (effective_gain(lambda, sigma_e) * trace_r))
}

/// Sharp bound using the largest eigenvalue of the input autocorrelation.
pub fn stepsize_bound_eigen(lambda: f64, sigma_e: f64, lambda_max: f64) -> Result<f64> {
    check(lambda, sigma_e, lambda_max, "lambda_max")?;
    Ok(2.0 / (effective_gain(lambda, sigma_e) * lambda_max))
}

/// Default number of trailing errors used to estimate `sigma_e`.
pub const DEFAULT_SIGMA_WINDOW: usize = 200;

/// Sample standard deviation of the last `window` errors.
pub fn error_std(errors: &[f64], window: usize) -> Result<f64> {
    let tail = &errors[errors.len().saturating_sub(window)..];
    if tail.len() < 2 {
        return Err(Error::invalid("need at least two errors to estimate sigma_e"));
    }
    let n = tail.len() as f64;
    let mean = tail.iter().sum::<f64>() / n;
    Ok((tail.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}
