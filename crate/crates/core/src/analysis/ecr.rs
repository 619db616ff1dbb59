//! Energy conservation relation over explicit feature maps.
//!
//! For the quantized update `Omega <- Omega + K(e) * phi(u_q)` and weight
//! deviation `V = Omega - Omega_opt`, the a priori and a posteriori errors
//! `e_a = V_old^T phi(u)` and `e_p = V_new^T phi(u)` satisfy
//!
//! ```text
//! ||V_new||^2 + e_a^2 / k^2 = ||V_old||^2 + e_p^2 / k^2 + beta_q
//! beta_q = 2 (e_p - e_a) (V_old^T phi(u_q) k - e_a) / k^2,   k = k(u_q, u)
//! ```
//!
//! The identity needs `k(u_q, u_q) = 1`, which holds for the Gaussian kernel.
//! Explicit maps are therefore unit-normalized by default; without
//! normalization the two sides differ by `(e_p - e_a)^2 (||phi(u_q)||^2 - 1) / k^2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::filters::krmn_gain;
use crate::kernels::{dot, ExplicitFeatureMap, FeatureMapKind};
use crate::mixing::{MixingRule, MixingState, INITIAL_LAMBDA};

/// Smallest `|k(u_q, u)|` the identity will divide by.
pub const KERNEL_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitWeightState {
    omega: Vec<f64>,
    omega_opt: Vec<f64>,
    fmap: ExplicitFeatureMap,
    normalized: bool,
}

impl ExplicitWeightState {
    /// Zero weights, zero reference, normalized features.
    pub fn new(fmap: ExplicitFeatureMap) -> Self {
        let n = fmap.feature_dim();
        Self {
            omega: vec![0.0; n],
            omega_opt: vec![0.0; n],
            fmap,
            normalized: true,
        }
    }

    pub fn with_reference(mut self, omega_opt: Vec<f64>) -> Result<Self> {
        check_dim(self.fmap.feature_dim(), omega_opt.len())?;
        self.omega_opt = omega_opt;
        Ok(self)
    }

    pub fn with_weights(mut self, omega: Vec<f64>) -> Result<Self> {
        check_dim(self.fmap.feature_dim(), omega.len())?;
        self.omega = omega;
        Ok(self)
    }

    /// Use the raw map instead of unit-normalized features.
    pub fn unnormalized(mut self) -> Self {
        self.normalized = false;
        self
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn deviation(&self) -> Vec<f64> {
        self.omega.iter().zip(&self.omega_opt).map(|(w, o)| w - o).collect()
    }

    pub fn features(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut phi = self.fmap.map(u)?;
        if self.normalized {
            let norm = dot(&phi, &phi).sqrt();
            if norm == 0.0 {
                return Err(Error::invalid("cannot normalize a zero feature vector"));
            }
            phi.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(phi)
    }

    pub fn predict(&self, u: &[f64]) -> Result<f64> {
        Ok(dot(&self.omega, &self.features(u)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcrRecord {
    /// Output error `d - Omega_old^T phi(u)` that drove the update.
    pub e: f64,
    pub e_a: f64,
    pub e_p: f64,
    pub kernel: f64,
    pub v_norm_before: f64,
    pub v_norm_after: f64,
    pub beta_q: f64,
    pub residual: f64,
}

/// Applies one quantized mixed-norm update and evaluates both sides of the
/// energy relation.
pub fn ecr_step(
    state: &mut ExplicitWeightState,
    u: &[f64],
    u_q: &[f64],
    d: f64,
    lambda: f64,
    mu: f64,
) -> Result<EcrRecord> {
    let phi = state.features(u)?;
    let phi_q = state.features(u_q)?;
    let k = dot(&phi_q, &phi);
    if !(k.abs() >= KERNEL_GUARD) {
        return Err(Error::SingularKernel(k));
    }

    let v_old = state.deviation();
    let e_a = dot(&v_old, &phi);
    let e = d - dot(&state.omega, &phi);
    let gain = krmn_gain(e, lambda, mu);
    for (w, p) in state.omega.iter_mut().zip(&phi_q) {
        *w += gain * p;
    }
    let v_new = state.deviation();
    let e_p = dot(&v_new, &phi);

    let k2 = k * k;
    let beta_q = 2.0 * (e_p - e_a) * (dot(&v_old, &phi_q) * k - e_a) / k2;
    let v_norm_before = dot(&v_old, &v_old);
    let v_norm_after = dot(&v_new, &v_new);
    let lhs = v_norm_after + e_a * e_a / k2;
    let rhs = v_norm_before + e_p * e_p / k2 + beta_q;
    Ok(EcrRecord {
        e,
        e_a,
        e_p,
        kernel: k,
        v_norm_before,
        v_norm_after,
        beta_q,
        residual: (lhs - rhs).abs(),
    })
}

/// Settings for a synthetic quantized run in an explicit feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct EcrRunConfig {
    pub kind: FeatureMapKind,
    pub input_dim: usize,
    pub steps: usize,
    pub seed: u64,
    pub step_size: f64,
    /// Input-space merge threshold deciding `u_q`.
    pub epsilon_u: f64,
    pub mixing: MixingRule,
    /// Reference weights; zeros when `None`.
    pub omega_opt: Option<Vec<f64>>,
}

impl EcrRunConfig {
    pub fn new(kind: FeatureMapKind, steps: usize, seed: u64) -> Self {
        Self {
            kind,
            input_dim: 3,
            steps,
            seed,
            step_size: 0.2,
            epsilon_u: 0.3,
            mixing: MixingRule::Alg2 { delta: 0.95, theta: 0.01, beta: 0.9 },
            omega_opt: None,
        }
    }
}

/// Runs a quantized filter on random inputs in `[-1, 1]^dim` with targets
/// from a random teacher, recording the energy relation at every step.
/// `u_q` is the nearest stored input within `epsilon_u`, else `u` itself.
pub fn ecr_run(cfg: &EcrRunConfig) -> Result<Vec<EcrRecord>> {
    let fmap = ExplicitFeatureMap::new(cfg.kind, cfg.input_dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let teacher: Vec<f64> = (0..fmap.feature_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut state = ExplicitWeightState::new(fmap);
    if let Some(opt) = &cfg.omega_opt {
        state = state.with_reference(opt.clone())?;
    }
    let mut mixing = MixingState::new(cfg.mixing, INITIAL_LAMBDA)?;
    let mut codebook: Vec<Vec<f64>> = Vec::new();
    let mut e_prev = 0.0;
    let mut records = Vec::with_capacity(cfg.steps);

    for _ in 0..cfg.steps {
        let u: Vec<f64> = (0..cfg.input_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = dot(&teacher, &state.features(&u)?) + 0.05 * rng.random_range(-1.0..1.0);
        let nearest = codebook
            .iter()
            .map(|c| crate::kernels::squared_distance(c, &u).sqrt())
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (j, dist)| match best {
                Some((_, b)) if b <= dist => best,
                _ => Some((j, dist)),
            });
        let u_q = match nearest {
            Some((j, dist)) if dist <= cfg.epsilon_u => codebook[j].clone(),
            _ => {
                codebook.push(u.clone());
                u.clone()
            }
        };
        let rec = ecr_step(&mut state, &u, &u_q, d, mixing.lambda(), cfg.step_size)?;
        mixing.update(rec.e, e_prev);
        e_prev = rec.e;
        records.push(rec);
    }
    Ok(records)
}
