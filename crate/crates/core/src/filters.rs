//! One-step online updates for the kernel and linear filter family.
//!
//! Every algorithm shares the error convention `e = d - y` and the combined
//! robust gain
//!
//! ```text
//! K(e) = mu * (2 * lambda * e + (1 - lambda) * sign(e))
//! ```
//!
//! with `sign(0) = 0`. The algorithms differ only in how `lambda` is chosen
//! and whether the input is quantized before being stored:
//!
//! | algorithm  | lambda            | quantized |
//! |------------|-------------------|-----------|
//! | `klms`     | 1 (gain `mu * e`) | no        |
//! | `klad`     | 0                 | no        |
//! | `krmn`     | fixed             | no        |
//! | `vpkrmn1`  | adaptive, rule 1  | no        |
//! | `vpkrmn2`  | adaptive, rule 2  | no        |
//! | `qklms`    | 1 (gain `mu * e`) | yes       |
//! | `qvpkrmn`  | adaptive, 1 or 2  | yes       |
//! | `lin-lms`  | 1 (gain `2 mu e`) | linear    |
//! | `lin-rmn`  | fixed             | linear    |
//!
//! The kernel LMS variants use the textbook gain `mu * e`, so KRMN with
//! `lambda = 1` and step `mu` follows the same trajectory as KLMS with step
//! `2 mu`. The linear LMS baseline keeps the mixed-norm scaling `2 mu e`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kernels::{dot, KernelParams, DEFAULT_BANDWIDTH};
use crate::mixing::{MixingRule, MixingState, INITIAL_LAMBDA};
use crate::quantizer::{Codebook, Decision};
use crate::rbf_network::RbfNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Klms,
    Klad,
    Krmn,
    Vpkrmn1,
    Vpkrmn2,
    Qklms,
    Qvpkrmn,
    LinLms,
    LinRmn,
}

impl Algorithm {
    pub fn is_linear(self) -> bool {
        matches!(self, Algorithm::LinLms | Algorithm::LinRmn)
    }

    pub fn is_quantized(self) -> bool {
        matches!(self, Algorithm::Qklms | Algorithm::Qvpkrmn)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Klms => "klms",
            Algorithm::Klad => "klad",
            Algorithm::Krmn => "krmn",
            Algorithm::Vpkrmn1 => "vpkrmn1",
            Algorithm::Vpkrmn2 => "vpkrmn2",
            Algorithm::Qklms => "qklms",
            Algorithm::Qvpkrmn => "qvpkrmn",
            Algorithm::LinLms => "lin-lms",
            Algorithm::LinRmn => "lin-rmn",
        }
    }
}

fn default_bandwidth() -> f64 {
    DEFAULT_BANDWIDTH
}

fn default_initial_lambda() -> f64 {
    INITIAL_LAMBDA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub algorithm: Algorithm,
    pub step_size: f64,
    /// Mixing parameter for `krmn` and `lin-rmn`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_lambda: Option<f64>,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: f64,
    /// Input-space merge threshold for `qklms` and `qvpkrmn`.
    #[serde(default)]
    pub epsilon_u: f64,
    /// Adaptation rule for the variable-mixing algorithms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<MixingRule>,
    #[serde(default = "default_initial_lambda")]
    pub initial_lambda: f64,
}

impl FilterConfig {
    pub fn new(algorithm: Algorithm, step_size: f64) -> Self {
        Self {
            algorithm,
            step_size,
            fixed_lambda: None,
            bandwidth: DEFAULT_BANDWIDTH,
            epsilon_u: 0.0,
            mixing: None,
            initial_lambda: INITIAL_LAMBDA,
        }
    }

    pub fn with_fixed_lambda(mut self, lambda: f64) -> Self {
        self.fixed_lambda = Some(lambda);
        self
    }

    pub fn with_mixing(mut self, rule: MixingRule) -> Self {
        self.mixing = Some(rule);
        self
    }

    pub fn with_epsilon_u(mut self, epsilon_u: f64) -> Self {
        self.epsilon_u = epsilon_u;
        self
    }

    pub fn with_bandwidth(mut self, bandwidth: f64) -> Self {
        self.bandwidth = bandwidth;
        self
    }

    /// Checks parameter ranges and that the parameters match the algorithm.
    /// Errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let field = |f: &str, msg: String| Err(Error::config(format!("filter.{f}"), msg));
        if !(self.step_size >= 0.0 && self.step_size.is_finite()) {
            return field("step_size", format!("must be nonnegative and finite, got {}", self.step_size));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return field("bandwidth", format!("must be positive, got {}", self.bandwidth));
        }
        if !(self.epsilon_u >= 0.0 && self.epsilon_u.is_finite()) {
            return field("epsilon_u", format!("must be nonnegative, got {}", self.epsilon_u));
        }
        if !self.algorithm.is_quantized() && self.epsilon_u != 0.0 {
            return field("epsilon_u", format!("only quantized algorithms take a threshold, not `{}`", self.algorithm.name()));
        }
        if !(0.0..=1.0).contains(&self.initial_lambda) {
            return field("initial_lambda", format!("must lie in [0, 1], got {}", self.initial_lambda));
        }
        let wants_fixed = matches!(self.algorithm, Algorithm::Krmn | Algorithm::LinRmn);
        match (wants_fixed, self.fixed_lambda) {
            (true, None) => return field("fixed_lambda", format!("required by `{}`", self.algorithm.name())),
            (true, Some(l)) if !(0.0..=1.0).contains(&l) => {
                return field("fixed_lambda", format!("must lie in [0, 1], got {l}"))
            }
            (false, Some(_)) => {
                return field("fixed_lambda", format!("not used by `{}`", self.algorithm.name()))
            }
            _ => {}
        }
        let rule_ok = match (self.algorithm, self.mixing) {
            (Algorithm::Vpkrmn1, Some(MixingRule::Alg1 { .. })) => true,
            (Algorithm::Vpkrmn2, Some(MixingRule::Alg2 { .. })) => true,
            (Algorithm::Qvpkrmn, Some(MixingRule::Alg1 { .. } | MixingRule::Alg2 { .. })) => true,
            (Algorithm::Vpkrmn1 | Algorithm::Vpkrmn2 | Algorithm::Qvpkrmn, _) => false,
            (_, None) => true,
            (_, Some(_)) => false,
        };
        if !rule_ok {
            return field("mixing", format!("rule {:?} does not fit `{}`", self.mixing, self.algorithm.name()));
        }
        if let Some(rule) = self.mixing {
            rule.validate().or_else(|e| field("mixing", e.to_string()))?;
        }
        Ok(())
    }

    /// Mixing state at the first iteration.
    fn initial_mixing(&self) -> Result<MixingState> {
        match self.algorithm {
            Algorithm::Klms | Algorithm::Qklms | Algorithm::LinLms => MixingState::fixed(1.0),
            Algorithm::Klad => MixingState::fixed(0.0),
            Algorithm::Krmn | Algorithm::LinRmn => {
                MixingState::fixed(self.fixed_lambda.unwrap_or(INITIAL_LAMBDA))
            }
            Algorithm::Vpkrmn1 | Algorithm::Vpkrmn2 | Algorithm::Qvpkrmn => MixingState::new(
                self.mixing.unwrap_or(MixingRule::Fixed),
                self.initial_lambda,
            ),
        }
    }

    /// Step size handed to [`krmn_gain`]. The kernel LMS variants halve it so
    /// their effective gain is the textbook `mu * e`.
    fn gain_step(&self) -> f64 {
        match self.algorithm {
            Algorithm::Klms | Algorithm::Qklms => 0.5 * self.step_size,
            _ => self.step_size,
        }
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `mu * (2 lambda e + (1 - lambda) sign(e))`.
#[inline]
pub fn krmn_gain(e: f64, lambda: f64, mu: f64) -> f64 {
    mu * (2.0 * lambda * e + (1.0 - lambda) * sign(e))
}

/// How a step changed the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Update {
    /// A new center holding the current input was stored with this coefficient.
    Appended,
    /// The gain was added to an existing center's coefficient.
    Merged(usize),
    /// The linear weight vector moved by `gain * u`.
    Weights,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub y: f64,
    pub e: f64,
    /// Mixing parameter used for this step's gain.
    pub lambda: f64,
    pub gain: f64,
    pub update: Update,
    /// Number of stored centers after the step (zero for linear filters).
    pub size: usize,
}

fn check_finite(u: &[f64], d: f64) -> Result<()> {
    if !d.is_finite() {
        return Err(Error::NonFinite(format!("desired value {d}")));
    }
    if let Some(x) = u.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("input entry {x}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct KernelFilter {
    config: FilterConfig,
    network: RbfNetwork,
    mixing: MixingState,
    previous_error: f64,
    iteration: usize,
}

impl KernelFilter {
    pub fn new(config: FilterConfig, input_dim: usize) -> Result<Self> {
        config.validate()?;
        if config.algorithm.is_linear() {
            return Err(Error::invalid(format!(
                "`{}` is a linear baseline, not a kernel filter",
                config.algorithm.name()
            )));
        }
        let network = RbfNetwork::with_dim(KernelParams::new(config.bandwidth)?, input_dim)?;
        let mixing = config.initial_mixing()?;
        Ok(Self {
            config,
            network,
            mixing,
            previous_error: 0.0,
            iteration: 0,
        })
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn network(&self) -> &RbfNetwork {
        &self.network
    }

    pub fn lambda(&self) -> f64 {
        self.mixing.lambda()
    }

    pub fn mixing(&self) -> &MixingState {
        &self.mixing
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn predict(&self, u: &[f64]) -> Result<f64> {
        self.network.predict(u)
    }

    pub fn step(&mut self, u: &[f64], d: f64) -> Result<StepOutput> {
        check_dim(self.network.dim().unwrap_or(u.len()), u.len())?;
        check_finite(u, d)?;

        let y = self.network.predict_unchecked(u);
        let e = d - y;
        let lambda = self.mixing.lambda();
        let gain = krmn_gain(e, lambda, self.config.gain_step());

        let decision = if self.config.algorithm.is_quantized() {
            Codebook::new(&self.network, self.config.epsilon_u)?.decide(u)?
        } else {
            Decision::Admit
        };
        let update = match decision {
            Decision::Merge(j) => {
                self.network.merge_coefficient(j, gain)?;
                Update::Merged(j)
            }
            Decision::Admit => {
                self.network.append_center(u, gain)?;
                Update::Appended
            }
        };

        self.mixing.update(e, self.previous_error);
        self.previous_error = e;
        self.iteration += 1;
        Ok(StepOutput {
            y,
            e,
            lambda,
            gain,
            update,
            size: self.network.len(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct LinearFilter {
    config: FilterConfig,
    weights: Vec<f64>,
    mixing: MixingState,
    iteration: usize,
}

impl LinearFilter {
    pub fn new(config: FilterConfig, input_dim: usize) -> Result<Self> {
        config.validate()?;
        if !config.algorithm.is_linear() {
            return Err(Error::invalid(format!(
                "`{}` is a kernel filter, not a linear baseline",
                config.algorithm.name()
            )));
        }
        if input_dim == 0 {
            return Err(Error::invalid("input dimension must be positive"));
        }
        let mixing = config.initial_mixing()?;
        Ok(Self {
            config,
            weights: vec![0.0; input_dim],
            mixing,
            iteration: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lambda(&self) -> f64 {
        self.mixing.lambda()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn predict(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.weights.len(), u.len())?;
        Ok(dot(&self.weights, u))
    }

    pub fn step(&mut self, u: &[f64], d: f64) -> Result<StepOutput> {
        check_dim(self.weights.len(), u.len())?;
        check_finite(u, d)?;
        let y = dot(&self.weights, u);
        let e = d - y;
        let lambda = self.mixing.lambda();
        let gain = krmn_gain(e, lambda, self.config.gain_step());
        for (w, x) in self.weights.iter_mut().zip(u) {
            *w += gain * x;
        }
        self.iteration += 1;
        Ok(StepOutput {
            y,
            e,
            lambda,
            gain,
            update: Update::Weights,
            size: 0,
        })
    }
}

/// Either member of the filter family behind one interface.
#[derive(Debug, Clone)]
pub enum AdaptiveFilter {
    Kernel(KernelFilter),
    Linear(LinearFilter),
}

impl AdaptiveFilter {
    pub fn new(config: FilterConfig, input_dim: usize) -> Result<Self> {
        if config.algorithm.is_linear() {
            LinearFilter::new(config, input_dim).map(Self::Linear)
        } else {
            KernelFilter::new(config, input_dim).map(Self::Kernel)
        }
    }

    pub fn step(&mut self, u: &[f64], d: f64) -> Result<StepOutput> {
        match self {
            Self::Kernel(f) => f.step(u, d),
            Self::Linear(f) => f.step(u, d),
        }
    }

    pub fn predict(&self, u: &[f64]) -> Result<f64> {
        match self {
            Self::Kernel(f) => f.predict(u),
            Self::Linear(f) => f.predict(u),
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            Self::Kernel(f) => f.lambda(),
            Self::Linear(f) => f.lambda(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Self::Kernel(f) => f.network().len(),
            Self::Linear(_) => 0,
        }
    }

    pub fn iteration(&self) -> usize {
        match self {
            Self::Kernel(f) => f.iteration(),
            Self::Linear(f) => f.iteration(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stream(n: usize, dim: usize, seed: u64) -> Vec<(Vec<f64>, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
                let d = u.iter().map(|x| x.sin()).sum::<f64>() + rng.random_range(-0.1..0.1);
                (u, d)
            })
            .collect()
    }

    fn trace(cfg: FilterConfig, data: &[(Vec<f64>, f64)]) -> Vec<StepOutput> {
        let mut f = AdaptiveFilter::new(cfg, data[0].0.len()).unwrap();
        data.iter().map(|(u, d)| f.step(u, *d).unwrap()).collect()
    }

    #[test]
    fn gain_examples() {
        assert!((krmn_gain(0.1, 1.0, 0.5) - 0.1).abs() < 1e-16);
        assert_eq!(krmn_gain(-3.0, 0.0, 1.0), -1.0);
        assert!((krmn_gain(0.5, 0.3, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(krmn_gain(0.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn first_step_appends_gain_of_desired() {
        let rule = MixingRule::Alg2 { delta: 0.9, theta: 0.01, beta: 0.9 };
        let cfg = FilterConfig::new(Algorithm::Vpkrmn2, 0.2).with_mixing(rule);
        let mut f = KernelFilter::new(cfg, 3).unwrap();
        let out = f.step(&[0.1, 0.2, 0.3], 0.8).unwrap();
        assert_eq!(out.y, 0.0);
        assert_eq!(out.e, 0.8);
        assert_eq!(out.lambda, 0.5);
        assert_eq!(out.update, Update::Appended);
        assert_eq!(f.network().coefficients(), &[krmn_gain(0.8, 0.5, 0.2)]);
        assert_eq!(f.iteration(), 1);
    }

    #[test]
    fn error_convention_matches_prediction() {
        let cfg = FilterConfig::new(Algorithm::Krmn, 0.3).with_fixed_lambda(0.4);
        let data = stream(50, 2, 3);
        let mut f = KernelFilter::new(cfg, 2).unwrap();
        for (u, d) in &data {
            let y = f.predict(u).unwrap();
            let out = f.step(u, *d).unwrap();
            assert_eq!(out.y, y);
            assert_eq!(out.e, d - y);
        }
    }

    #[test]
    fn krmn_unit_lambda_matches_klms_double_step() {
        let data = stream(300, 3, 11);
        let a = trace(FilterConfig::new(Algorithm::Krmn, 0.2).with_fixed_lambda(1.0), &data);
        let b = trace(FilterConfig::new(Algorithm::Klms, 0.4), &data);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.e.to_bits(), y.e.to_bits());
            assert_eq!(x.y.to_bits(), y.y.to_bits());
        }
    }

    #[test]
    fn krmn_zero_lambda_matches_klad() {
        let data = stream(300, 3, 12);
        let a = trace(FilterConfig::new(Algorithm::Krmn, 0.2).with_fixed_lambda(0.0), &data);
        let b = trace(FilterConfig::new(Algorithm::Klad, 0.2), &data);
        assert_eq!(a, b);
    }

    #[test]
    fn frozen_alg1_matches_krmn() {
        let data = stream(300, 2, 13);
        let a = trace(
            FilterConfig::new(Algorithm::Vpkrmn1, 0.2).with_mixing(MixingRule::Alg1 { gamma: 0.0 }),
            &data,
        );
        let b = trace(FilterConfig::new(Algorithm::Krmn, 0.2).with_fixed_lambda(0.5), &data);
        assert_eq!(a, b);
    }

    #[test]
    fn unquantized_qvpkrmn_matches_vpkrmn() {
        let data = stream(400, 2, 14);
        let rule = MixingRule::Alg2 { delta: 0.95, theta: 0.01, beta: 0.9 };
        let a = trace(FilterConfig::new(Algorithm::Qvpkrmn, 0.3).with_mixing(rule), &data);
        let b = trace(FilterConfig::new(Algorithm::Vpkrmn2, 0.3).with_mixing(rule), &data);
        assert_eq!(a, b);
        assert_eq!(a.last().unwrap().size, 400);
    }

    #[test]
    fn quantization_merges_repeated_inputs() {
        let cfg = FilterConfig::new(Algorithm::Qklms, 0.5).with_epsilon_u(0.1);
        let mut f = KernelFilter::new(cfg, 1).unwrap();
        f.step(&[0.0], 1.0).unwrap();
        let out = f.step(&[0.05], 1.0).unwrap();
        assert_eq!(out.update, Update::Merged(0));
        assert_eq!(f.network().len(), 1);
        // 0.5 * 1 + 0.5 * (1 - 0.5 * k(0.05, 0))
        let k = (-0.1f64 * 0.0025).exp();
        assert!((f.network().coefficients()[0] - (0.5 + 0.5 * (1.0 - 0.5 * k))).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let mut f = KernelFilter::new(FilterConfig::new(Algorithm::Klad, 0.1), 2).unwrap();
        assert!(matches!(f.step(&[1.0], 0.0), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(f.step(&[1.0, f64::NAN], 0.0), Err(Error::NonFinite(_))));
        assert!(matches!(f.step(&[1.0, 0.0], f64::INFINITY), Err(Error::NonFinite(_))));
        assert_eq!(f.iteration(), 0);
    }

    #[test]
    fn config_validation_names_fields() {
        let missing = FilterConfig::new(Algorithm::Krmn, 0.1).validate().unwrap_err();
        assert!(missing.to_string().contains("fixed_lambda"));
        let wrong_rule = FilterConfig::new(Algorithm::Vpkrmn1, 0.1)
            .with_mixing(MixingRule::Alg2 { delta: 0.9, theta: 0.01, beta: 0.9 })
            .validate()
            .unwrap_err();
        assert!(wrong_rule.to_string().contains("mixing"));
        let eps = FilterConfig::new(Algorithm::Klms, 0.1).with_epsilon_u(0.5).validate().unwrap_err();
        assert!(eps.to_string().contains("epsilon_u"));
        assert!(FilterConfig::new(Algorithm::Klms, -0.1).validate().is_err());
    }

    #[test]
    fn linear_lms_first_step() {
        let mut f = LinearFilter::new(FilterConfig::new(Algorithm::LinLms, 0.05), 3).unwrap();
        let u = [1.0, -2.0, 0.5];
        let out = f.step(&u, 0.7).unwrap();
        assert_eq!((out.y, out.e), (0.0, 0.7));
        for (w, x) in f.weights().iter().zip(u) {
            assert!((w - 2.0 * 0.05 * 0.7 * x).abs() < 1e-16);
        }
    }

    #[test]
    fn linear_rmn_zero_lambda_is_sign_lms() {
        let cfg = FilterConfig::new(Algorithm::LinRmn, 0.1).with_fixed_lambda(0.0);
        let mut f = LinearFilter::new(cfg, 2).unwrap();
        let u = [3.0, 4.0];
        f.step(&u, -250.0).unwrap();
        let norm = f.weights().iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!((norm - 0.1 * 5.0).abs() < 1e-15);
        assert_eq!(f.weights(), &[-0.1 * 3.0, -0.1 * 4.0]);
    }

    proptest! {
        #[test]
        fn gain_displacement_is_bounded(e in -1e6f64..1e6, lambda in 0.0f64..=1.0, mu in 0.0f64..2.0) {
            let g = krmn_gain(e, lambda, mu);
            prop_assert!(g.abs() <= 2.0 * mu * lambda * e.abs() + mu * (1.0 - lambda) + 1e-12 * g.abs().max(1.0));
        }

        #[test]
        fn runs_are_deterministic(seed in 0u64..1000) {
            let data = stream(60, 2, seed);
            let rule = MixingRule::Alg1 { gamma: 0.01 };
            let cfg = FilterConfig::new(Algorithm::Qvpkrmn, 0.4).with_mixing(rule).with_epsilon_u(0.3);
            let a = trace(cfg.clone(), &data);
            let b = trace(cfg, &data);
            prop_assert_eq!(a, b);
        }
    }
}
