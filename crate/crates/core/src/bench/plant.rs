use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// FIR taps of the benchmark plant's linear stage.
pub const DEFAULT_FIR_TAPS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.4, 0.3, 0.2, 0.1];

/// Quadratic coefficient of the memoryless nonlinearity `r - 0.9 r^2`.
pub const NONLINEARITY_COEFF: f64 = 0.9;

fn default_taps() -> Vec<f64> {
    DEFAULT_FIR_TAPS.to_vec()
}

fn default_input_variance() -> f64 {
    1.0
}

/// Wiener-type plant: an FIR filter followed by `r - 0.9 r^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    #[serde(default = "default_taps")]
    pub fir_taps: Vec<f64>,
    /// Variance of the white Gaussian input.
    #[serde(default = "default_input_variance")]
    pub input_variance: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            fir_taps: default_taps(),
            input_variance: default_input_variance(),
        }
    }
}

impl PlantConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fir_taps.is_empty() || self.fir_taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::config("plant.fir_taps", "must be a nonempty list of finite numbers"));
        }
        if !(self.input_variance > 0.0 && self.input_variance.is_finite()) {
            return Err(Error::config(
                "plant.input_variance",
                format!("must be positive, got {}", self.input_variance),
            ));
        }
        Ok(())
    }

    /// Output of the linear stage. `history[k]` is the input `k` steps ago.
    pub fn linear_stage(&self, history: &[f64]) -> Result<f64> {
        if history.len() < self.fir_taps.len() {
            return Err(Error::invalid(format!(
                "plant needs {} past inputs, got {}",
                self.fir_taps.len(),
                history.len()
            )));
        }
        Ok(self.fir_taps.iter().zip(history).map(|(h, x)| h * x).sum())
    }
}

fn nonlinearity(r: f64) -> f64 {
    r - NONLINEARITY_COEFF * r * r
}

/// Plant output `r - 0.9 r^2 + v` where `r` is the FIR response to `history`.
pub fn plant_output(cfg: &PlantConfig, history: &[f64], v: f64) -> Result<f64> {
    Ok(nonlinearity(cfg.linear_stage(history)?) + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silent_input_gives_zero() {
        assert_eq!(plant_output(&PlantConfig::default(), &[0.0; 9], 0.0).unwrap(), 0.0);
    }

    #[test]
    fn impulse_response_is_tap_sequence() {
        let cfg = PlantConfig::default();
        let mut history = vec![0.0; 9];
        let mut rs = Vec::new();
        for n in 0..12 {
            history.rotate_right(1);
            history[0] = if n == 0 { 1.0 } else { 0.0 };
            rs.push(cfg.linear_stage(&history).unwrap());
        }
        assert_eq!(&rs[..9], &DEFAULT_FIR_TAPS);
        assert_eq!(&rs[9..], &[0.0; 3]);
    }

    #[test]
    fn unit_linear_output() {
        // 2 * 0.5 = 1 from the centre tap alone
        let mut history = [0.0; 9];
        history[4] = 2.0;
        let d = plant_output(&PlantConfig::default(), &history, 0.0).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
        let noisy = plant_output(&PlantConfig::default(), &history, 0.25).unwrap();
        assert!((noisy - 0.35).abs() < 1e-15);
    }

    #[test]
    fn short_history_is_rejected() {
        assert!(plant_output(&PlantConfig::default(), &[1.0; 8], 0.0).is_err());
    }
}
