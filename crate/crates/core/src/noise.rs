//! Impulsive noise models and seeded random streams.
//!
//! * Bernoulli-Gaussian: `v = g + b * i` with `g ~ N(0, sigma_g^2)`,
//!   `b ~ Bernoulli(c)` and `i ~ N(0, sigma_i^2)`.
//! * Symmetric alpha-stable with characteristic function `exp(-m |t|^alpha)`,
//!   drawn with the Chambers-Mallows-Stuck transform.
//!
//! All randomness flows through [`SeededStream`], a ChaCha8 generator keyed
//! by a 64-bit seed and a per-trial stream id.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand::distr::Open01;
use rand_distr::{Distribution, Exp1, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the only supported generator. Stored in configs and metadata so a
/// change of generator is visible.
pub const RNG_ALGORITHM: &str = "chacha8-v1";

#[derive(Debug, Clone)]
pub struct SeededStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BgParams {
    /// Probability `c` that an impulse is active.
    pub impulse_prob: f64,
    pub sigma_impulse: f64,
    pub sigma_gauss: f64,
}

impl BgParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.impulse_prob) {
            return Err(Error::config("noise.impulse_prob", format!("must lie in [0, 1], got {}", self.impulse_prob)));
        }
        for (name, s) in [("noise.sigma_impulse", self.sigma_impulse), ("noise.sigma_gauss", self.sigma_gauss)] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::config(name, format!("must be nonnegative, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SasParams {
    pub alpha: f64,
    /// Dispersion `m` in `exp(-m |t|^alpha)`.
    pub dispersion: f64,
}

impl SasParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::config("noise.alpha", format!("must lie in (0, 2], got {}", self.alpha)));
        }
        if !(self.dispersion > 0.0 && self.dispersion.is_finite()) {
            return Err(Error::config("noise.dispersion", format!("must be positive, got {}", self.dispersion)));
        }
        Ok(())
    }
}

/// One Bernoulli-Gaussian draw together with whether the impulse fired.
pub fn sample_bg_detailed(params: &BgParams, stream: &mut SeededStream) -> (f64, bool) {
    let g = params.sigma_gauss * stream.standard_normal();
    let fired = stream.rng().random_bool(params.impulse_prob);
    let i = params.sigma_impulse * stream.standard_normal();
    (if fired { g + i } else { g }, fired)
}

/// One Bernoulli-Gaussian draw.
pub fn sample_bg(params: &BgParams, stream: &mut SeededStream) -> f64 {
    sample_bg_detailed(params, stream).0
}

/// One symmetric alpha-stable draw with characteristic function
/// `exp(-m |t|^alpha)`.
pub fn sample_sas(params: &SasParams, stream: &mut SeededStream) -> f64 {
    let alpha = params.alpha;
    let v = PI * (Distribution::<f64>::sample(&Open01, stream.rng()) - 0.5);
    let w: f64 = Exp1.sample(stream.rng());
    let standard = if (alpha - 1.0).abs() < 1e-12 {
        v.tan()
    } else {
        let lead = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
        let tail = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
        lead * tail
    };
    debug_assert!(v.abs() < FRAC_PI_2);
    params.dispersion.powf(1.0 / alpha) * standard
}

/// Dispersion giving the requested signal-to-noise ratio in decibels for an
/// input of variance `input_variance`: `m = sigma_u^2 / 10^(snr_db / 10)`.
pub fn snr_to_dispersion(snr_db: f64, input_variance: f64) -> Result<f64> {
    if !(input_variance > 0.0 && input_variance.is_finite()) {
        return Err(Error::invalid(format!("input variance must be positive, got {input_variance}")));
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid("SNR must be finite"));
    }
    Ok(input_variance / 10f64.powf(snr_db / 10.0))
}

/// Configured noise source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum NoiseModel {
    /// No additive noise.
    None,
    Bg(BgParams),
    Sas(SasParams),
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::None => Ok(()),
            NoiseModel::Bg(p) => p.validate(),
            NoiseModel::Sas(p) => p.validate(),
        }
    }

    pub fn sample(&self, stream: &mut SeededStream) -> f64 {
        match self {
            NoiseModel::None => 0.0,
            NoiseModel::Bg(p) => sample_bg(p, stream),
            NoiseModel::Sas(p) => sample_sas(p, stream),
        }
    }
}

/// Gaussian draw with the given variance. Zero variance yields zeros.
pub(crate) fn gaussian(variance: f64, stream: &mut SeededStream) -> f64 {
    match Normal::new(0.0, variance.sqrt()) {
        Ok(n) => n.sample(stream.rng()),
        Err(_) => 0.0,
    }
}
