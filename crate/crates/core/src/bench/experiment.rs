//! Single-trial execution and Monte Carlo averaging.

use rayon::prelude::*;

use crate::bench::config::ExperimentConfig;
use crate::bench::dataset::{make_dataset, Dataset, Sample};
use crate::error::{Error, Result};
use crate::filters::{AdaptiveFilter, StepOutput, Update};
use crate::noise::SeededStream;

/// Traces from one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub stream_id: u64,
    /// Iteration counts at which the test set was evaluated; starts at 0.
    pub iterations: Vec<usize>,
    pub test_mse: Vec<f64>,
    /// Network size at each evaluation point.
    pub network_size: Vec<usize>,
    /// Mixing parameter in effect for the next sample at each evaluation point.
    pub lambda: Vec<f64>,
    /// Mixing parameter used at every training step.
    pub lambda_trace: Vec<f64>,
    /// Network size after every training step.
    pub size_trace: Vec<usize>,
    /// Iteration at which the trial was declared diverged; traces stop there.
    pub diverged_at: Option<usize>,
}

impl TrialResult {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

/// Test-set predictions kept in step with the model so the test MSE is
/// available at every iteration without re-evaluating the whole network.
struct TestTracker<'a> {
    samples: &'a [Sample],
    predictions: Vec<f64>,
}

impl<'a> TestTracker<'a> {
    fn new(samples: &'a [Sample]) -> Self {
        Self {
            samples,
            predictions: vec![0.0; samples.len()],
        }
    }

    fn apply(&mut self, filter: &AdaptiveFilter, input: &[f64], out: &StepOutput) -> Result<()> {
        match (filter, out.update) {
            (AdaptiveFilter::Kernel(k), Update::Appended) => {
                let kernel = k.network().kernel();
                for (p, s) in self.predictions.iter_mut().zip(self.samples) {
                    *p += out.gain * kernel.eval_unchecked(&s.input, input);
                }
            }
            (AdaptiveFilter::Kernel(k), Update::Merged(j)) => {
                let net = k.network();
                for (p, s) in self.predictions.iter_mut().zip(self.samples) {
                    *p += out.gain * net.kernel_to_center(j, &s.input);
                }
            }
            (filter, _) => {
                for (p, s) in self.predictions.iter_mut().zip(self.samples) {
                    *p = filter.predict(&s.input)?;
                }
            }
        }
        Ok(())
    }

    fn mse(&self) -> f64 {
        let sum: f64 = self
            .predictions
            .iter()
            .zip(self.samples)
            .map(|(p, s)| (s.target - p).powi(2))
            .sum();
        sum / self.samples.len() as f64
    }
}

/// Trains one filter on `data` and records its learning curve.
pub fn run_on_dataset(cfg: &ExperimentConfig, data: &Dataset, stream_id: u64) -> Result<TrialResult> {
    let mut filter = AdaptiveFilter::new(cfg.filter.clone(), cfg.embed_dim)?;
    let mut tracker = TestTracker::new(&data.test);
    let n_evals = data.train.len() / cfg.eval_every + 2;
    let mut result = TrialResult {
        stream_id,
        iterations: Vec::with_capacity(n_evals),
        test_mse: Vec::with_capacity(n_evals),
        network_size: Vec::with_capacity(n_evals),
        lambda: Vec::with_capacity(n_evals),
        lambda_trace: Vec::with_capacity(data.train.len()),
        size_trace: Vec::with_capacity(data.train.len()),
        diverged_at: None,
    };
    let record = |r: &mut TrialResult, iteration: usize, filter: &AdaptiveFilter, mse: f64| {
        r.iterations.push(iteration);
        r.test_mse.push(mse);
        r.network_size.push(filter.size());
        r.lambda.push(filter.lambda());
    };
    record(&mut result, 0, &filter, tracker.mse());

    for (n, sample) in data.train.iter().enumerate() {
        let iteration = n + 1;
        let out = filter.step(&sample.input, sample.target)?;
        if !(out.e.is_finite() && out.gain.is_finite()) {
            result.diverged_at = Some(iteration);
            break;
        }
        tracker.apply(&filter, &sample.input, &out)?;
        result.lambda_trace.push(out.lambda);
        result.size_trace.push(out.size);

        if iteration % cfg.eval_every == 0 || iteration == data.train.len() {
            let mse = tracker.mse();
            if !mse.is_finite() || mse > cfg.divergence_threshold {
                result.diverged_at = Some(iteration);
                break;
            }
            record(&mut result, iteration, &filter, mse);
        }
    }
    Ok(result)
}

/// Runs one trial on the substream `stream`.
pub fn run_trial(cfg: &ExperimentConfig, stream: &mut SeededStream) -> Result<TrialResult> {
    cfg.validate()?;
    let data = make_dataset(cfg, stream)?;
    run_on_dataset(cfg, &data, stream.stream_id())
}

/// Trial-averaged learning curve.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub iterations: Vec<usize>,
    pub test_mse: Vec<f64>,
    pub network_size: Vec<f64>,
    pub lambda_mean: Vec<f64>,
    /// Stream ids of trials that diverged and were left out of the means.
    pub diverged_trials: Vec<u64>,
    /// Every trial, diverged or not, in stream-id order.
    pub per_trial: Vec<TrialResult>,
}

impl LearningCurve {
    pub fn trials_used(&self) -> usize {
        self.per_trial.len() - self.diverged_trials.len()
    }

    /// Mean test MSE over evaluation points in the last `fraction` of training.
    pub fn steady_state_mse(&self, fraction: f64) -> f64 {
        let last = *self.iterations.last().unwrap_or(&0) as f64;
        let start = last * (1.0 - fraction);
        let tail: Vec<f64> = self
            .iterations
            .iter()
            .zip(&self.test_mse)
            .filter(|(&i, _)| i as f64 > start)
            .map(|(_, &m)| m)
            .collect();
        tail.iter().sum::<f64>() / tail.len().max(1) as f64
    }

    pub fn final_network_size(&self) -> f64 {
        self.network_size.last().copied().unwrap_or(0.0)
    }
}

/// Averages non-diverged trials pointwise in stream-id order.
pub fn average_trials(per_trial: Vec<TrialResult>) -> Result<LearningCurve> {
    let diverged_trials: Vec<u64> = per_trial.iter().filter(|t| t.diverged()).map(|t| t.stream_id).collect();
    let used: Vec<&TrialResult> = per_trial.iter().filter(|t| !t.diverged()).collect();
    let Some(first) = used.first() else {
        return Err(Error::AllTrialsDiverged { trials: per_trial.len() });
    };
    let len = first.iterations.len();
    if used.iter().any(|t| t.iterations != first.iterations) {
        return Err(Error::invalid("trials disagree on evaluation points"));
    }
    let n = used.len() as f64;
    let mean = |f: &dyn Fn(&TrialResult, usize) -> f64| -> Vec<f64> {
        (0..len).map(|i| used.iter().map(|t| f(t, i)).sum::<f64>() / n).collect()
    };
    let test_mse = mean(&|t, i| t.test_mse[i]);
    let network_size = mean(&|t, i| t.network_size[i] as f64);
    let lambda_mean = mean(&|t, i| t.lambda[i]);
    Ok(LearningCurve {
        iterations: first.iterations.clone(),
        test_mse,
        network_size,
        lambda_mean,
        diverged_trials,
        per_trial,
    })
}

/// Runs `cfg.trials` trials on substreams `0..trials` of `cfg.seed` and
/// averages them. Trials run in parallel; results do not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<LearningCurve> {
    cfg.validate()?;
    let per_trial = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|id| run_trial(cfg, &mut SeededStream::new(cfg.seed, id)))
        .collect::<Result<Vec<_>>>()?;
    average_trials(per_trial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{Algorithm, FilterConfig};
    use crate::mixing::MixingRule;
    use crate::noise::{BgParams, NoiseModel, SasParams};

    fn small(filter: FilterConfig) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(filter);
        c.train_len = 200;
        c.test_len = 50;
        c.trials = 3;
        c.seed = 5;
        c.noise = NoiseModel::Bg(BgParams { impulse_prob: 0.2, sigma_impulse: 0.5, sigma_gauss: 0.02 });
        c
    }

    #[test]
    fn zero_step_never_learns() {
        let cfg = small(FilterConfig::new(Algorithm::Klms, 0.0));
        let mut s = SeededStream::new(cfg.seed, 0);
        let data = make_dataset(&cfg, &mut s.clone()).unwrap();
        let t = run_trial(&cfg, &mut s).unwrap();
        let base = data.test.iter().map(|x| x.target * x.target).sum::<f64>() / 50.0;
        for m in &t.test_mse {
            assert!((m - base).abs() < 1e-15);
        }
    }

    #[test]
    fn unquantized_size_equals_iteration() {
        let cfg = small(FilterConfig::new(Algorithm::Klad, 0.1));
        let t = run_trial(&cfg, &mut SeededStream::new(1, 0)).unwrap();
        for (i, s) in t.size_trace.iter().enumerate() {
            assert_eq!(*s, i + 1);
        }
        assert_eq!(t.iterations, (0..=20).map(|k| k * 10).collect::<Vec<_>>());
    }

    #[test]
    fn incremental_test_predictions_match_direct() {
        let rule = MixingRule::Alg1 { gamma: 0.001 };
        let cfg = small(FilterConfig::new(Algorithm::Qvpkrmn, 0.3).with_mixing(rule).with_epsilon_u(1.5));
        let data = make_dataset(&cfg, &mut SeededStream::new(2, 0)).unwrap();
        let mut filter = AdaptiveFilter::new(cfg.filter.clone(), cfg.embed_dim).unwrap();
        let mut tracker = TestTracker::new(&data.test);
        let mut merged = 0;
        for s in &data.train {
            let out = filter.step(&s.input, s.target).unwrap();
            merged += matches!(out.update, Update::Merged(_)) as usize;
            tracker.apply(&filter, &s.input, &out).unwrap();
        }
        assert!(merged > 0);
        for (p, s) in tracker.predictions.iter().zip(&data.test) {
            assert!((p - filter.predict(&s.input).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn average_is_pointwise_mean() {
        let cfg = small(FilterConfig::new(Algorithm::Krmn, 0.2).with_fixed_lambda(0.3));
        let mut two = cfg.clone();
        two.trials = 2;
        let curve = run_experiment(&two).unwrap();
        let a = run_trial(&cfg, &mut SeededStream::new(cfg.seed, 0)).unwrap();
        let b = run_trial(&cfg, &mut SeededStream::new(cfg.seed, 1)).unwrap();
        for i in 0..curve.iterations.len() {
            assert_eq!(curve.test_mse[i], (a.test_mse[i] + b.test_mse[i]) / 2.0);
            assert_eq!(curve.network_size[i], (a.network_size[i] + b.network_size[i]) as f64 / 2.0);
        }
    }

    #[test]
    fn single_trial_curve_is_the_trial() {
        let mut cfg = small(FilterConfig::new(Algorithm::Klms, 0.5));
        cfg.trials = 1;
        let curve = run_experiment(&cfg).unwrap();
        let t = run_trial(&cfg, &mut SeededStream::new(cfg.seed, 0)).unwrap();
        assert_eq!(curve.test_mse, t.test_mse);
        assert_eq!(curve.lambda_mean, t.lambda);
    }

    #[test]
    fn more_trials_leave_trial_zero_alone() {
        let cfg = small(FilterConfig::new(Algorithm::Klms, 0.5));
        let mut more = cfg.clone();
        more.trials = 6;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&more).unwrap();
        assert_eq!(a.per_trial[0], b.per_trial[0]);
        assert_eq!(a.per_trial[2], b.per_trial[2]);
    }

    #[test]
    fn klms_diverges_under_heavy_alpha_stable_noise() {
        // regression seed: heavy-tailed noise with a large step drives KLMS past the threshold
        let mut cfg = small(FilterConfig::new(Algorithm::Klms, 2.5));
        cfg.noise = NoiseModel::Sas(SasParams { alpha: 1.1, dispersion: 1.0 });
        cfg.train_len = 600;
        cfg.divergence_threshold = 1e4;
        let t = run_trial(&cfg, &mut SeededStream::new(7, 0)).unwrap();
        assert!(t.diverged(), "final mse {:?}", t.test_mse.last());
        assert!(t.iterations.len() < 61);
    }

    #[test]
    fn all_diverged_is_an_error() {
        let mut t = run_trial(&small(FilterConfig::new(Algorithm::Klms, 0.5)), &mut SeededStream::new(1, 0)).unwrap();
        t.diverged_at = Some(3);
        assert_eq!(average_trials(vec![t.clone(), t]), Err(Error::AllTrialsDiverged { trials: 2 }));
    }

    #[test]
    fn curve_is_reproducible() {
        let rule = MixingRule::Alg2 { delta: 0.9, theta: 0.01, beta: 0.9 };
        let cfg = small(FilterConfig::new(Algorithm::Vpkrmn2, 0.3).with_mixing(rule));
        assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
    }

    #[test]
    fn size_trace_is_bounded_and_monotone() {
        let rule = MixingRule::Alg2 { delta: 0.9, theta: 0.01, beta: 0.9 };
        let cfg = small(FilterConfig::new(Algorithm::Qvpkrmn, 0.3).with_mixing(rule).with_epsilon_u(2.0));
        let t = run_trial(&cfg, &mut SeededStream::new(3, 0)).unwrap();
        for (i, w) in t.size_trace.windows(2).enumerate() {
            assert!(w[0] <= w[1]);
            assert!(w[1] <= i + 2);
        }
    }
}
