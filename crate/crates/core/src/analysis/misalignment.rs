//! Monte Carlo check of the step-size bound on a linear problem.
//!
//! Inputs are white standard Gaussian vectors (identity feature map, so
//! `R = I`), targets are `Omega_opt^T u + v` with Gaussian `v`, and the
//! filter is the linear mixed-norm update with a fixed `lambda`.

use rayon::prelude::*;

use crate::analysis::bounds::stepsize_bound;
use crate::analysis::wiener::wiener_solution;
use crate::error::{Error, Result};
use crate::filters::{Algorithm, FilterConfig, LinearFilter};
use crate::noise::SeededStream;

#[derive(Debug, Clone, PartialEq)]
pub struct MisalignmentConfig {
    pub omega_opt: Vec<f64>,
    pub noise_std: f64,
    pub lambda: f64,
    pub step_size: f64,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
}

impl MisalignmentConfig {
    pub fn new(step_size: f64) -> Self {
        Self {
            omega_opt: vec![1.0, -0.5, 0.25, 2.0],
            noise_std: 0.5,
            lambda: 0.5,
            step_size,
            steps: 300,
            trials: 200,
            seed: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.omega_opt.len()
    }
}

fn draw(cfg: &MisalignmentConfig, stream: &mut SeededStream) -> (Vec<f64>, f64) {
    let u: Vec<f64> = (0..cfg.dim()).map(|_| stream.standard_normal()).collect();
    let clean: f64 = u.iter().zip(&cfg.omega_opt).map(|(a, b)| a * b).sum();
    let d = clean + cfg.noise_std * stream.standard_normal();
    (u, d)
}

/// Step-size bound for the problem, with `sigma_e = sqrt(zeta_min)` and the
/// autocorrelation trace both estimated from `pilot_len` samples.
pub fn pilot_bound(cfg: &MisalignmentConfig, pilot_len: usize) -> Result<f64> {
    let mut stream = SeededStream::new(cfg.seed, u64::MAX);
    let (xs, ds): (Vec<Vec<f64>>, Vec<f64>) = (0..pilot_len).map(|_| draw(cfg, &mut stream)).unzip();
    let w = wiener_solution(&xs, &ds)?;
    if !(w.zeta_min > 0.0) {
        return Err(Error::invalid("pilot data has no residual error"));
    }
    stepsize_bound(cfg.lambda, w.zeta_min.sqrt(), w.trace_r())
}

/// Norm of the trial-averaged weight deviation `||mean_t V_t(n)||` for
/// `n = 0..=steps`. Non-finite entries mark numerical blow-up.
pub fn mean_misalignment(cfg: &MisalignmentConfig) -> Result<Vec<f64>> {
    if cfg.trials == 0 || cfg.omega_opt.is_empty() {
        return Err(Error::invalid("need at least one trial and one weight"));
    }
    let filter = FilterConfig::new(Algorithm::LinRmn, cfg.step_size).with_fixed_lambda(cfg.lambda);
    filter.validate()?;
    let per_trial: Vec<Vec<Vec<f64>>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|id| {
            let mut stream = SeededStream::new(cfg.seed, id);
            let mut f = LinearFilter::new(filter.clone(), cfg.dim())?;
            let deviation = |f: &LinearFilter| -> Vec<f64> {
                f.weights().iter().zip(&cfg.omega_opt).map(|(w, o)| w - o).collect()
            };
            let mut trace = Vec::with_capacity(cfg.steps + 1);
            trace.push(deviation(&f));
            for _ in 0..cfg.steps {
                let (u, d) = draw(cfg, &mut stream);
                if f.weights().iter().all(|w| w.is_finite()) {
                    f.step(&u, d)?;
                }
                trace.push(deviation(&f));
            }
            Ok(trace)
        })
        .collect::<Result<_>>()?;

    let n = cfg.trials as f64;
    Ok((0..=cfg.steps)
        .map(|step| {
            (0..cfg.dim())
                .map(|k| per_trial.iter().map(|t| t[step][k]).sum::<f64>() / n)
                .map(|m| m * m)
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

/// Block means of `norms` over consecutive windows of `block` steps.
pub fn block_means(norms: &[f64], block: usize) -> Vec<f64> {
    norms
        .chunks(block.max(1))
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

/// Decaying: after `burn_in` blocks, block means never increase until they
/// reach `floor` times the first block mean, and the last block sits below
/// that floor.
pub fn is_decaying(norms: &[f64], block: usize, burn_in: usize, floor: f64) -> bool {
    let means = block_means(norms, block);
    let Some(&first) = means.first() else {
        return false;
    };
    let target = floor * first;
    let monotone = means[burn_in.min(means.len())..]
        .windows(2)
        .take_while(|w| w[0] > target)
        .all(|w| w[1] <= w[0]);
    let last = *means.last().unwrap();
    monotone && last.is_finite() && last < target
}

/// Growing: the final norm is non-finite or exceeds `factor` times the start.
pub fn is_growing(norms: &[f64], factor: f64) -> bool {
    match (norms.first(), norms.last()) {
        (Some(&a), Some(&b)) => !b.is_finite() || b > factor * a,
        _ => false,
    }
}
