use crate::bench::config::ExperimentConfig;
use crate::bench::plant::plant_output;
use crate::error::Result;
use crate::noise::{gaussian, SeededStream};

/// One regressor/target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// The `embed_dim` most recent inputs, newest first.
    pub input: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

/// Newest-first window of length `len` ending at `n`, zero padded before the
/// start of the signal.
fn window(signal: &[f64], n: usize, len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| if k <= n { signal[n - k] } else { 0.0 })
        .collect()
}

/// Draws one training segment followed by one test segment of plant data.
///
/// The input is white Gaussian noise with the plant's input variance; both
/// segments come from one contiguous input signal. Noise is added to the
/// training targets, and to the test targets only when `noisy_test` is set.
/// Draw order is fixed: all inputs, then training noise, then test noise.
pub fn make_dataset(cfg: &ExperimentConfig, stream: &mut SeededStream) -> Result<Dataset> {
    let total = cfg.train_len + cfg.test_len;
    let variance = cfg.plant.input_variance;
    let signal: Vec<f64> = (0..total).map(|_| gaussian(variance, stream)).collect();
    let taps = cfg.plant.fir_taps.len();

    let mut train = Vec::with_capacity(cfg.train_len);
    let mut test = Vec::with_capacity(cfg.test_len);
    for n in 0..total {
        let is_train = n < cfg.train_len;
        let v = if is_train || cfg.noisy_test {
            cfg.noise.sample(stream)
        } else {
            0.0
        };
        let target = plant_output(&cfg.plant, &window(&signal, n, taps), v)?;
        let sample = Sample {
            input: window(&signal, n, cfg.embed_dim),
            target,
        };
        if is_train {
            train.push(sample);
        } else {
            test.push(sample);
        }
    }
    Ok(Dataset { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::plant::PlantConfig;
    use crate::filters::{Algorithm, FilterConfig};
    use crate::noise::{BgParams, NoiseModel};

    fn cfg() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(FilterConfig::new(Algorithm::Klms, 0.5));
        c.train_len = 40;
        c.test_len = 15;
        c.noise = NoiseModel::Bg(BgParams { impulse_prob: 0.2, sigma_impulse: 0.5, sigma_gauss: 0.02 });
        c
    }

    #[test]
    fn equal_streams_equal_datasets() {
        let a = make_dataset(&cfg(), &mut SeededStream::new(9, 2)).unwrap();
        let b = make_dataset(&cfg(), &mut SeededStream::new(9, 2)).unwrap();
        assert_eq!(a, b);
        let c = make_dataset(&cfg(), &mut SeededStream::new(9, 3)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn windows_slide_by_one() {
        let c = cfg();
        let data = make_dataset(&c, &mut SeededStream::new(1, 0)).unwrap();
        let all: Vec<&Sample> = data.train.iter().chain(&data.test).collect();
        for pair in all.windows(2) {
            assert_eq!(pair[1].input[1..], pair[0].input[..c.embed_dim - 1]);
        }
        // warm-up is zero padded
        assert!(all[0].input[1..].iter().all(|&x| x == 0.0));
        assert_eq!(all[2].input[3..], [0.0; 6]);
    }

    #[test]
    fn test_targets_are_clean_plant_outputs() {
        let c = cfg();
        let data = make_dataset(&c, &mut SeededStream::new(4, 0)).unwrap();
        for s in &data.test {
            let clean = plant_output(&c.plant, &s.input, 0.0).unwrap();
            assert_eq!(s.target, clean);
        }
        // with the embedding equal to the FIR length the training noise is
        // exactly the gap to the clean output, and some of it is nonzero
        let gaps = data
            .train
            .iter()
            .filter(|s| s.target != plant_output(&c.plant, &s.input, 0.0).unwrap())
            .count();
        assert!(gaps > 0);
    }

    #[test]
    fn silent_plant_gives_zero_test_targets() {
        let mut c = cfg();
        c.plant = PlantConfig { fir_taps: vec![0.0; 9], input_variance: 1.0 };
        let data = make_dataset(&c, &mut SeededStream::new(4, 0)).unwrap();
        assert!(data.test.iter().all(|s| s.target == 0.0));
    }
}
