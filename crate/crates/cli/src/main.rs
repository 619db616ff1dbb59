use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use krmn::analysis::{ecr_run, stepsize_bound, stepsize_bound_eigen, EcrRunConfig};
use krmn::bench::{curve_csv, run_experiment, samples_csv, write_atomic, ExperimentFile, RunMetadata};
use krmn::noise::{sample_bg, sample_sas, snr_to_dispersion};
use krmn::{BgParams, Error, FeatureMapKind, SasParams, SeededStream};

/// Environment variable that overrides the output directory of `run`.
const OUT_DIR_ENV: &str = "KRMN_OUT_DIR";

#[derive(Parser)]
#[command(name = "krmn", about = "Kernel robust mixed-norm adaptive filtering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every filter of an experiment file and write one CSV per filter.
    Run {
        config: PathBuf,
        /// Output directory (default ./results; KRMN_OUT_DIR overrides).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use 15000 training samples, 1000 test samples and 50 trials.
        #[arg(long)]
        full_scale: bool,
    },
    /// Draw noise samples as `index,value` CSV; summary statistics go to stderr.
    Noise {
        #[command(subcommand)]
        model: NoiseCommand,
    },
    /// Check the energy conservation relation step by step.
    EcrCheck {
        #[arg(long, value_enum, default_value = "poly2")]
        map: MapArg,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the step-size upper bound.
    Bound {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        sigma_e: f64,
        #[arg(long)]
        trace_r: f64,
        /// Also print the bound using the largest autocorrelation eigenvalue.
        #[arg(long)]
        lambda_max: Option<f64>,
    },
    /// Print version and generator information.
    Version,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum NoiseCommand {
    /// Bernoulli-Gaussian: background Gaussian plus gated Gaussian impulses.
    Bg {
        #[arg(long, default_value_t = 0.2)]
        impulse_prob: f64,
        #[arg(long, default_value_t = 0.02)]
        sigma_impulse: f64,
        #[arg(long, default_value_t = 0.02)]
        sigma_gauss: f64,
        #[command(flatten)]
        sample: SampleArgs,
    },
    /// Symmetric alpha-stable.
    Sas {
        #[arg(long, default_value_t = 1.4)]
        alpha: f64,
        #[arg(long, conflicts_with = "snr_db")]
        dispersion: Option<f64>,
        #[arg(long)]
        snr_db: Option<f64>,
        /// Input variance the SNR is measured against.
        #[arg(long, default_value_t = 1.0)]
        input_variance: f64,
        #[command(flatten)]
        sample: SampleArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MapArg {
    Linear,
    Poly2,
}

enum Failure {
    Usage(String),
    AllDiverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::AllTrialsDiverged { .. } => Failure::AllDiverged(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => Ok(write_atomic(path, text.as_bytes())?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(config: &Path, out: Option<PathBuf>, full_scale: bool) -> Result<(), Failure> {
    let mut file = ExperimentFile::load(config)?;
    if full_scale {
        file = file.to_full_scale();
    }
    let out_dir = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .or(out)
        .unwrap_or_else(|| PathBuf::from("results"));
    std::fs::create_dir_all(&out_dir).map_err(|e| {
        Failure::Usage(format!("output directory {} is not writable: {e}", out_dir.display()))
    })?;

    let mut diverged = Vec::new();
    for (label, cfg) in &file.runs {
        let start = Instant::now();
        let curve = match run_experiment(cfg) {
            Ok(c) => c,
            Err(e @ Error::AllTrialsDiverged { .. }) => {
                eprintln!("{}/{label}: {e}", file.name);
                diverged.push(label.clone());
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let secs = start.elapsed().as_secs_f64();
        let stem = format!("{}__{label}", file.name);
        let csv_path = out_dir.join(format!("{stem}.csv"));
        write_atomic(&csv_path, curve_csv(&curve).as_bytes())?;
        let meta = RunMetadata::new(&file.name, label, cfg, &curve, secs);
        write_atomic(&out_dir.join(format!("{stem}.meta.json")), meta.to_json().as_bytes())?;
        eprintln!(
            "{}/{label}: steady-state MSE {:.6}, final size {:.1}, {}/{} trials, {:.1} s -> {}",
            file.name,
            curve.steady_state_mse(0.1),
            curve.final_network_size(),
            curve.trials_used(),
            cfg.trials,
            secs,
            csv_path.display()
        );
    }
    if diverged.is_empty() {
        Ok(())
    } else {
        Err(Failure::AllDiverged(format!("all trials diverged for: {}", diverged.join(", "))))
    }
}

fn summarize(values: &[f64]) -> String {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    format!("count {} mean {mean:.6} variance {var:.6} median {median:.6} max|x| {max_abs:.6}", values.len())
}

fn noise(model: NoiseCommand) -> Result<(), Failure> {
    let (values, sample) = match model {
        NoiseCommand::Bg { impulse_prob, sigma_impulse, sigma_gauss, sample } => {
            let p = BgParams { impulse_prob, sigma_impulse, sigma_gauss };
            p.validate()?;
            let mut s = SeededStream::new(sample.seed, sample.stream);
            ((0..sample.count).map(|_| sample_bg(&p, &mut s)).collect::<Vec<_>>(), sample)
        }
        NoiseCommand::Sas { alpha, dispersion, snr_db, input_variance, sample } => {
            let dispersion = match (dispersion, snr_db) {
                (Some(m), None) => m,
                (None, Some(snr)) => snr_to_dispersion(snr, input_variance)?,
                _ => return Err(Failure::Usage("alpha-stable noise needs --dispersion or --snr-db".into())),
            };
            let p = SasParams { alpha, dispersion };
            p.validate()?;
            let mut s = SeededStream::new(sample.seed, sample.stream);
            ((0..sample.count).map(|_| sample_sas(&p, &mut s)).collect::<Vec<_>>(), sample)
        }
    };
    if values.is_empty() {
        return Err(Failure::Usage("--count must be at least 1".into()));
    }
    emit(sample.out.as_deref(), &samples_csv(&values))?;
    eprintln!("{}", summarize(&values));
    Ok(())
}

fn ecr_check(map: MapArg, steps: usize, seed: u64, out: Option<PathBuf>) -> Result<(), Failure> {
    let kind = match map {
        MapArg::Linear => FeatureMapKind::LinearIdentity,
        MapArg::Poly2 => FeatureMapKind::PolynomialDegree2,
    };
    let records = ecr_run(&EcrRunConfig::new(kind, steps, seed))?;
    let mut csv = String::from("step,e,e_a,e_p,kernel,v_norm_before,v_norm_after,beta_q,residual\n");
    for (i, r) in records.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            i + 1,
            r.e,
            r.e_a,
            r.e_p,
            r.kernel,
            r.v_norm_before,
            r.v_norm_after,
            r.beta_q,
            r.residual
        ));
    }
    emit(out.as_deref(), &csv)?;
    let worst = records.iter().fold(0.0f64, |m, r| m.max(r.residual.abs()));
    eprintln!("{} steps, max |residual| {worst:e}", records.len());
    Ok(())
}

fn bound(lambda: f64, sigma_e: f64, trace_r: f64, lambda_max: Option<f64>) -> Result<(), Failure> {
    println!("{}", stepsize_bound(lambda, sigma_e, trace_r)?);
    if let Some(l) = lambda_max {
        println!("{}", stepsize_bound_eigen(lambda, sigma_e, l)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run { config, out, full_scale } => run(&config, out, full_scale),
        Command::Noise { model } => noise(model),
        Command::EcrCheck { map, steps, seed, out } => ecr_check(map, steps, seed, out),
        Command::Bound { lambda, sigma_e, trace_r, lambda_max } => bound(lambda, sigma_e, trace_r, lambda_max),
        Command::Version => {
            println!("krmn {} (rng {})", env!("CARGO_PKG_VERSION"), krmn::RNG_ALGORITHM);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::AllDiverged(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
