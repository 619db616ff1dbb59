use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Second moment of the misalignment in the eigenbasis of the input
/// autocorrelation.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    /// Row-major symmetric `n x n` matrix.
    xi: Vec<f64>,
    eigenvalues: Vec<f64>,
    sigma_e: f64,
}

impl MomentState {
    pub fn new(xi: Vec<f64>, eigenvalues: Vec<f64>, sigma_e: f64) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 || xi.len() != n * n {
            return Err(Error::invalid(format!(
                "moment matrix needs {} entries for {n} eigenvalues, got {}",
                n * n,
                xi.len()
            )));
        }
        if eigenvalues.iter().any(|&l| !(l >= 0.0)) {
            return Err(Error::invalid("eigenvalues must be nonnegative"));
        }
        if !(sigma_e > 0.0 && sigma_e.is_finite()) {
            return Err(Error::invalid(format!("sigma_e must be positive, got {sigma_e}")));
        }
        for i in 0..n {
            for j in 0..i {
                if xi[i * n + j] != xi[j * n + i] {
                    return Err(Error::invalid(format!("moment matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { xi, eigenvalues, sigma_e })
    }

    /// Diagonal moment matrix.
    pub fn diagonal(diag: &[f64], eigenvalues: Vec<f64>, sigma_e: f64) -> Result<Self> {
        let n = diag.len();
        let mut xi = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            xi[i * n + i] = d;
        }
        Self::new(xi, eigenvalues, sigma_e)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.xi[i * self.dim() + j]
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// One step of the elementwise second-moment recursion
///
/// ```text
/// xi_ij <- (1 - mu (1 - lambda) sqrt(2/pi) / sigma_e (l_i + l_j)) xi_ij
///          + mu^2 l_i [i == j] + 4 mu lambda sigma_e^2
/// ```
///
/// where `l_i` are the autocorrelation eigenvalues. The last term is added to
/// every entry, as in the scalar form of the recursion.
pub fn moment_recursion_step(state: &MomentState, lambda: f64, mu: f64) -> MomentState {
    let n = state.dim();
    let sign_gain = mu * (1.0 - lambda) * (2.0 / PI).sqrt() / state.sigma_e;
    let drive = 4.0 * mu * lambda * state.sigma_e * state.sigma_e;
    let l = &state.eigenvalues;
    let mut xi = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let contraction = 1.0 - sign_gain * (l[i] + l[j]);
            let diag = if i == j { mu * mu * l[i] } else { 0.0 };
            xi[i * n + j] = contraction * state.get(i, j) + diag + drive;
        }
    }
    MomentState {
        xi,
        eigenvalues: state.eigenvalues.clone(),
        sigma_e: state.sigma_e,
    }
}
