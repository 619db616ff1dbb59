use crate::error::{check_dim, Error, Result};

/// Optimal linear weights in feature space from sample moments.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerSolution {
    pub omega_opt: Vec<f64>,
    /// Minimum mean-square error `E[d^2] - R_phid^T Omega_opt`.
    pub zeta_min: f64,
    /// Sample autocorrelation, row-major.
    pub r_phiphi: Vec<f64>,
    pub r_phid: Vec<f64>,
}

impl WienerSolution {
    pub fn dim(&self) -> usize {
        self.omega_opt.len()
    }

    pub fn trace_r(&self) -> f64 {
        let n = self.dim();
        (0..n).map(|i| self.r_phiphi[i * n + i]).sum()
    }
}

/// Relative pivot size below which the autocorrelation counts as singular.
const PIVOT_TOLERANCE: f64 = 1e-12;

/// Solves `R_phiphi Omega = R_phid` built from the rows of `features`.
/// A singular moment matrix is reported with the (zero-based) feature
/// dimension at which elimination found no usable pivot.
pub fn wiener_solution(features: &[Vec<f64>], targets: &[f64]) -> Result<WienerSolution> {
    check_dim(features.len(), targets.len())?;
    let Some(first) = features.first() else {
        return Err(Error::invalid("need at least one sample"));
    };
    let n = first.len();
    if n == 0 {
        return Err(Error::invalid("feature vectors must be nonempty"));
    }
    let count = features.len() as f64;

    let mut r = vec![0.0; n * n];
    let mut p = vec![0.0; n];
    let mut d2 = 0.0;
    for (phi, &d) in features.iter().zip(targets) {
        check_dim(n, phi.len())?;
        for i in 0..n {
            p[i] += phi[i] * d;
            for j in 0..n {
                r[i * n + j] += phi[i] * phi[j];
            }
        }
        d2 += d * d;
    }
    r.iter_mut().for_each(|x| *x /= count);
    p.iter_mut().for_each(|x| *x /= count);
    d2 /= count;

    let omega_opt = solve(&r, &p, n)?;
    let zeta_min = d2 - p.iter().zip(&omega_opt).map(|(a, b)| a * b).sum::<f64>();
    Ok(WienerSolution {
        omega_opt,
        zeta_min,
        r_phiphi: r,
        r_phid: p,
    })
}

/// Gaussian elimination with partial pivoting on a dense `n x n` system.
fn solve(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = (0..n).map(|i| m[i * n + i].abs()).fold(0.0, f64::max);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap_or(col);
        if !(m[pivot_row * n + col].abs() > PIVOT_TOLERANCE * scale) {
            return Err(Error::RankDeficient { dimension: col });
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
            }
            x.swap(col, pivot_row);
        }
        let pivot = m[col * n + col];
        for row in col + 1..n {
            let f = m[row * n + col] / pivot;
            if f != 0.0 {
                for k in col..n {
                    m[row * n + k] -= f * m[col * n + k];
                }
                x[row] -= f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        let tail: f64 = (col + 1..n).map(|k| m[col * n + k] * x[k]).sum();
        x[col] = (x[col] - tail) / m[col * n + col];
    }
    Ok(x)
}
