//! Online vector quantization of the input space.
//!
//! A new input either merges into its nearest stored center (when the
//! Euclidean distance is at most `epsilon_u`) or becomes a new center.
//! The codebook is the center list of an [`RbfNetwork`].

use crate::error::{check_dim, Error, Result};
use crate::kernels::squared_distance;
use crate::rbf_network::RbfNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// Fold the update into the coefficient of this center.
    Merge(usize),
    /// Store the input as a new center.
    Admit,
}

/// Read-only view of a network's centers together with the merge threshold.
#[derive(Debug, Clone, Copy)]
pub struct Codebook<'a> {
    network: &'a RbfNetwork,
    epsilon_u: f64,
}

impl<'a> Codebook<'a> {
    pub fn new(network: &'a RbfNetwork, epsilon_u: f64) -> Result<Self> {
        if !(epsilon_u >= 0.0 && epsilon_u.is_finite()) {
            return Err(Error::invalid(format!(
                "quantization threshold must be nonnegative and finite, got {epsilon_u}"
            )));
        }
        Ok(Self { network, epsilon_u })
    }

    pub fn epsilon_u(&self) -> f64 {
        self.epsilon_u
    }

    pub fn len(&self) -> usize {
        self.network.len()
    }

    pub fn is_empty(&self) -> bool {
        self.network.is_empty()
    }

    /// Index of and Euclidean distance to the closest center. Ties go to the
    /// lowest index.
    pub fn nearest(&self, u: &[f64]) -> Result<(usize, f64)> {
        if self.network.is_empty() {
            return Err(Error::EmptyCodebook);
        }
        if let Some(d) = self.network.dim() {
            check_dim(d, u.len())?;
        }
        let mut best = (0, f64::INFINITY);
        for (j, c) in self.network.centers().enumerate() {
            let d2 = squared_distance(u, c);
            if d2 < best.1 {
                best = (j, d2);
            }
        }
        Ok((best.0, best.1.sqrt()))
    }

    pub fn decide(&self, u: &[f64]) -> Result<Decision> {
        match self.nearest(u) {
            Ok((j, dist)) if dist <= self.epsilon_u => Ok(Decision::Merge(j)),
            Ok(_) | Err(Error::EmptyCodebook) => Ok(Decision::Admit),
            Err(e) => Err(e),
        }
    }
}
