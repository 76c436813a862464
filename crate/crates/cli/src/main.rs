//! `ibody`: reproducible experiments around the intersection-body map.
//!
//! Exit status: 0 when every check is within tolerance, 1 on a tolerance
//! violation or numerical failure, 2 on an invalid configuration.

mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ibody::body::StarBody;
use ibody::experiments::{
    build_perturbation, eigen_check, ellipsoid_check, lemma1_scaling, multiplier_bound,
    radon_oracle, smoothing_gain, Verdict,
};
use ibody::harmonics::Representation;
use ibody::iteration::{run_iteration, IterationOptions};
use serde::Serialize;

use config::{Flags, RunConfig};
use output::{write_body, write_outputs};

#[derive(Parser)]
#[command(
    name = "ibody",
    version,
    about = "Numerical experiments on the intersection-body map near the ball"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Spectral versus geometric Radon eigenvalues on Z_k, for --dims up to --k-max
    EigenCheck,
    /// Spectral versus geometric Radon on random band-limited functions
    RadonOracle,
    /// Intersection body of diag(--axes) against the closed form
    EllipsoidCheck,
    /// Run the corrected (or --raw-power) iteration and record per-step telemetry
    Iterate,
    /// Sup-norm ratios of the smooth cutoff multipliers over a random corpus
    MultiplierBound,
    /// Tail-ratio slope of the Radon transform for power-law spectra
    SmoothingGain,
    /// Fitted sup-norm exponents of the normalized cap family
    Lemma1Scaling,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::EigenCheck => "eigen-check",
            Command::RadonOracle => "radon-oracle",
            Command::EllipsoidCheck => "ellipsoid-check",
            Command::Iterate => "iterate",
            Command::MultiplierBound => "multiplier-bound",
            Command::SmoothingGain => "smoothing-gain",
            Command::Lemma1Scaling => "lemma1-scaling",
        }
    }
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<ibody::Error> for Failure {
    fn from(e: ibody::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<Box<dyn std::error::Error>> for Failure {
    fn from(e: Box<dyn std::error::Error>) -> Self {
        Failure::Run(e.to_string())
    }
}

fn finish<T: Serialize + Verdict, R: Serialize>(
    cfg: &RunConfig,
    report: &T,
    rows: &[R],
) -> Result<bool, Failure> {
    let summary = report.summary();
    println!("{summary}");
    write_outputs(cfg, report.passed(), &summary, report, rows)?;
    Ok(report.passed())
}

fn load_start(cfg: &RunConfig) -> Result<StarBody, Failure> {
    if let Some(path) = &cfg.body {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())));
    }
    let phi = build_perturbation(
        &cfg.perturbation,
        cfg.representation,
        cfg.dim,
        cfg.band_limit,
        cfg.epsilon,
        cfg.seed,
    )
    .map_err(|e| Failure::Config(e.to_string()))?;
    StarBody::from_perturbation(&phi).map_err(|e| Failure::Config(e.to_string()))
}

#[derive(Serialize)]
struct IterateSummary<'a> {
    #[serde(flatten)]
    report: &'a ibody::iteration::IterationReport,
    passed: bool,
}

fn iterate(cfg: &RunConfig) -> Result<bool, Failure> {
    let start = load_start(cfg)?;
    let opts = IterationOptions {
        kill_h2: cfg.kill_h2,
        raw_power_mode: cfg.raw_power,
        max_steps: cfg.steps,
        stop_tol: cfg.stop_tol,
        band_limit: None,
        alpha: cfg.alpha,
        track_c2: true,
    };
    let report = run_iteration(&start, &opts)?;
    let passed = if cfg.raw_power {
        report.envelope_holds()
    } else {
        report.monotone_after_first
    };
    let last = report.steps.last();
    let summary = format!(
        "iterate: d={} K={} steps={} final l2 {:.3e} sup {:.3e}; asymptotic ratio {} (predicted {:.4}){}",
        report.dim,
        report.band_limit,
        report.steps.len(),
        last.map_or(report.initial_l2, |s| s.l2),
        last.map_or(report.initial_sup, |s| s.sup),
        report.asymptotic_ratio.map_or("n/a".to_string(), |r| format!("{r:.4}")),
        report.predicted_ratio,
        if cfg.raw_power {
            format!("; envelope holds: {}", report.envelope_holds())
        } else {
            format!("; monotone: {}", report.monotone_after_first)
        }
    );
    println!("{summary}");
    let wrapped = IterateSummary {
        report: &report,
        passed,
    };
    write_outputs(cfg, passed, &summary, &wrapped, &report.csv_rows())?;
    write_body(&cfg.out, &report.final_body).map_err(|e| Failure::Run(e.to_string()))?;
    Ok(passed)
}

#[derive(Serialize)]
struct TrialRow {
    trial: usize,
    error: f64,
}

#[derive(Serialize)]
struct EllipsoidRow {
    band_limit: usize,
    truncation: f64,
    rel_sup_error: f64,
}

#[derive(Serialize)]
struct SmoothingRow {
    d: usize,
    decay: f64,
    slope: f64,
    target: f64,
    multiplier_exponent: f64,
}

fn run(command: Command, cfg: &RunConfig) -> Result<bool, Failure> {
    match command {
        Command::EigenCheck => {
            let rep = eigen_check(&cfg.dims, cfg.k_max)?;
            finish(cfg, &rep, &rep.rows)
        }
        Command::RadonOracle => {
            let rep = radon_oracle(
                cfg.seed,
                cfg.representation,
                cfg.dim,
                cfg.band_limit,
                cfg.trials,
            )?;
            let rows: Vec<TrialRow> = rep
                .errors
                .iter()
                .enumerate()
                .map(|(trial, &error)| TrialRow { trial, error })
                .collect();
            finish(cfg, &rep, &rows)
        }
        Command::EllipsoidCheck => {
            let d = cfg.axes.len();
            if d > 3 && cfg.axes[..d - 1].iter().any(|&a| a != cfg.axes[0]) {
                return Err(Failure::Config(
                    "axes beyond three must have the form a,...,a,b".into(),
                ));
            }
            let rep = ellipsoid_check(&cfg.axes, cfg.band_limit)?;
            let row = EllipsoidRow {
                band_limit: rep.band_limit,
                truncation: rep.truncation,
                rel_sup_error: rep.rel_sup_error,
            };
            finish(cfg, &rep, &[row])
        }
        Command::Iterate => iterate(cfg),
        Command::MultiplierBound => {
            if cfg.representation != Representation::Zonal {
                return Err(Failure::Config(
                    "multiplier-bound uses a zonal corpus".into(),
                ));
            }
            let rep =
                multiplier_bound(&cfg.ns, cfg.seed, cfg.corpus_size, cfg.dim, cfg.band_limit)?;
            finish(cfg, &rep, &rep.rows)
        }
        Command::SmoothingGain => {
            if !(cfg.decay > 0.5) {
                return Err(Failure::Config(format!(
                    "decay must exceed 0.5, got {}",
                    cfg.decay
                )));
            }
            let rep = smoothing_gain(cfg.dim, cfg.decay)?;
            let row = SmoothingRow {
                d: rep.dim,
                decay: rep.decay,
                slope: rep.slope,
                target: rep.target,
                multiplier_exponent: rep.multiplier_exponent,
            };
            finish(cfg, &rep, &[row])
        }
        Command::Lemma1Scaling => {
            if cfg.resolution < 8 {
                return Err(Failure::Config(format!(
                    "resolution must be at least 8, got {}",
                    cfg.resolution
                )));
            }
            let rep = lemma1_scaling(cfg.dim, cfg.resolution)?;
            finish(cfg, &rep, &rep.scaling.rows)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::resolve(cli.command.name(), &cli.flags) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: invalid config: {e}");
            return ExitCode::from(2);
        }
    };
    match run(cli.command, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: invalid config: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
