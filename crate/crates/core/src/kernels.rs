//! Gaussian kernel evaluation and explicit finite-dimensional feature maps.
//!
//! The Gaussian kernel uses the bandwidth convention
//!
//! ```text
//! k(u, v) = exp(-h * ||u - v||^2)
//! ```
//!
//! so a larger `h` means a narrower kernel. Its feature space is infinite
//! dimensional and is never materialized. The explicit maps below exist so
//! that feature-space quantities (weight-deviation norms, a priori and a
//! posteriori errors) can be computed exactly by the analysis module.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Bandwidth used by every kernel benchmark configuration.
pub const DEFAULT_BANDWIDTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    bandwidth: f64,
}

impl KernelParams {
    pub fn new(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::invalid(format!(
                "kernel bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(Self { bandwidth })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Kernel value without the dimension check. Callers guarantee equal lengths.
    #[inline]
    pub(crate) fn eval_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        (-self.bandwidth * squared_distance(u, v)).exp()
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            bandwidth: DEFAULT_BANDWIDTH,
        }
    }
}

#[inline]
pub(crate) fn squared_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Gaussian kernel `exp(-h ||u - v||^2)`.
pub fn eval_gaussian(u: &[f64], v: &[f64], params: &KernelParams) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    Ok(params.eval_unchecked(u, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMapKind {
    /// `phi(u) = u`, inducing the linear kernel `u^T v`.
    LinearIdentity,
    /// All degree-2 monomials with `sqrt(2)` cross terms, inducing `(u^T v)^2`.
    PolynomialDegree2,
}

/// A feature map whose features can be written down explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExplicitFeatureMap {
    kind: FeatureMapKind,
    input_dim: usize,
}

impl ExplicitFeatureMap {
    pub fn new(kind: FeatureMapKind, input_dim: usize) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::invalid("feature map input dimension must be positive"));
        }
        Ok(Self { kind, input_dim })
    }

    pub fn kind(&self) -> FeatureMapKind {
        self.kind
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn feature_dim(&self) -> usize {
        match self.kind {
            FeatureMapKind::LinearIdentity => self.input_dim,
            FeatureMapKind::PolynomialDegree2 => self.input_dim * (self.input_dim + 1) / 2,
        }
    }

    /// Maps `u` into feature space.
    pub fn map(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.input_dim, u.len())?;
        Ok(match self.kind {
            FeatureMapKind::LinearIdentity => u.to_vec(),
            FeatureMapKind::PolynomialDegree2 => {
                let mut phi = Vec::with_capacity(self.feature_dim());
                for i in 0..u.len() {
                    phi.push(u[i] * u[i]);
                    for j in i + 1..u.len() {
                        phi.push(std::f64::consts::SQRT_2 * u[i] * u[j]);
                    }
                }
                phi
            }
        })
    }

    /// The kernel this map induces, evaluated without materializing features.
    pub fn induced_kernel(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_dim(self.input_dim, u.len())?;
        check_dim(self.input_dim, v.len())?;
        let inner = dot(u, v);
        Ok(match self.kind {
            FeatureMapKind::LinearIdentity => inner,
            FeatureMapKind::PolynomialDegree2 => inner * inner,
        })
    }
}
