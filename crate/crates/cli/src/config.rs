//! Run configuration: defaults, then the TOML file, then command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ibody::experiments::{default_multiplier_ns, Perturbation, Preset};
use ibody::harmonics::Representation;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReprArg {
    Zonal,
    S2,
}

impl From<ReprArg> for Representation {
    fn from(r: ReprArg) -> Self {
        match r {
            ReprArg::Zonal => Representation::Zonal,
            ReprArg::S2 => Representation::S2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Z4Mix,
    H2Only,
    RandomEven,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Z4Mix => Preset::Z4Mix,
            PresetArg::H2Only => Preset::H2Only,
            PresetArg::RandomEven => Preset::RandomEven,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with any of the settings below; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub representation: Option<ReprArg>,
    #[arg(long, global = true)]
    pub band_limit: Option<usize>,
    /// Size of the starting perturbation
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Maximum number of iteration steps
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report formats to write (default: both)
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
    #[arg(long, global = true, overrides_with = "no_kill_h2")]
    pub kill_h2: bool,
    #[arg(long, global = true, overrides_with = "kill_h2")]
    pub no_kill_h2: bool,
    /// Iterate f -> R f^(d-1) with no correction or rescaling
    #[arg(long, global = true)]
    pub raw_power: bool,
    #[arg(long, global = true, value_enum, conflicts_with = "terms")]
    pub preset: Option<PresetArg>,
    /// Explicit perturbation terms, e.g. `4:1.0,6:0.5`
    #[arg(long, global = true, value_parser = parse_term, value_delimiter = ',')]
    pub terms: Vec<(usize, f64)>,
    #[arg(long, global = true)]
    pub stop_tol: Option<f64>,
    /// Exponent of the tracked U_alpha norm
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Starting body (JSON) instead of a generated perturbation
    #[arg(long, global = true)]
    pub body: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub dims: Vec<usize>,
    #[arg(long, global = true)]
    pub k_max: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub axes: Vec<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub ns: Vec<usize>,
    #[arg(long, global = true)]
    pub corpus_size: Option<usize>,
    /// Spectral decay exponent: e_k ~ k^(-2 decay)
    #[arg(long, global = true)]
    pub decay: Option<f64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Colatitude samples for the cap experiment
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
}

fn parse_term(s: &str) -> Result<(usize, f64), String> {
    let (k, a) = s
        .split_once(':')
        .ok_or_else(|| format!("expected degree:amplitude, got `{s}`"))?;
    let k = k
        .trim()
        .parse()
        .map_err(|e| format!("bad degree `{k}`: {e}"))?;
    let a = a
        .trim()
        .parse()
        .map_err(|e| format!("bad amplitude `{a}`: {e}"))?;
    Ok((k, a))
}

/// The config file: every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dim: Option<usize>,
    pub representation: Option<Representation>,
    pub band_limit: Option<usize>,
    pub perturbation: Option<Perturbation>,
    pub epsilon: Option<f64>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<Format>>,
    pub kill_h2: Option<bool>,
    pub raw_power: Option<bool>,
    pub stop_tol: Option<f64>,
    pub alpha: Option<f64>,
    pub body: Option<PathBuf>,
    pub dims: Option<Vec<usize>>,
    pub k_max: Option<usize>,
    pub axes: Option<Vec<f64>>,
    pub ns: Option<Vec<usize>>,
    pub corpus_size: Option<usize>,
    pub decay: Option<f64>,
    pub trials: Option<usize>,
    pub resolution: Option<usize>,
}

/// Fully resolved settings, written to `config.resolved.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub dim: usize,
    pub representation: Representation,
    pub band_limit: usize,
    pub perturbation: Perturbation,
    pub epsilon: f64,
    pub steps: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Vec<Format>,
    pub kill_h2: bool,
    pub raw_power: bool,
    pub stop_tol: f64,
    pub alpha: f64,
    pub body: Option<PathBuf>,
    pub dims: Vec<usize>,
    pub k_max: usize,
    pub axes: Vec<f64>,
    pub ns: Vec<usize>,
    pub corpus_size: usize,
    pub decay: f64,
    pub trials: usize,
    pub resolution: usize,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn read_file_config(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

fn non_empty<T>(v: Vec<T>) -> Option<Vec<T>> {
    (!v.is_empty()).then_some(v)
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &Flags) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let kill_flag = if flags.no_kill_h2 {
            Some(false)
        } else if flags.kill_h2 {
            Some(true)
        } else {
            None
        };
        let perturbation = if let Some(p) = flags.preset {
            Some(Perturbation::Preset(p.into()))
        } else {
            non_empty(flags.terms.clone()).map(Perturbation::Terms)
        };
        let default_band = if command == "multiplier-bound" {
            128
        } else {
            32
        };
        let cfg = RunConfig {
            command: command.to_string(),
            dim: flags.dim.or(file.dim).unwrap_or(3),
            representation: flags
                .representation
                .map(Into::into)
                .or(file.representation)
                .unwrap_or(Representation::Zonal),
            band_limit: flags.band_limit.or(file.band_limit).unwrap_or(default_band),
            perturbation: perturbation.or(file.perturbation).unwrap_or_default(),
            epsilon: flags.epsilon.or(file.epsilon).unwrap_or(1e-3),
            steps: flags.steps.or(file.steps).unwrap_or(10),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            format: non_empty(flags.format.clone())
                .or(file.format)
                .unwrap_or_else(|| vec![Format::Json, Format::Csv]),
            kill_h2: kill_flag.or(file.kill_h2).unwrap_or(true),
            raw_power: flags.raw_power || file.raw_power.unwrap_or(false),
            stop_tol: flags.stop_tol.or(file.stop_tol).unwrap_or(1e-13),
            alpha: flags.alpha.or(file.alpha).unwrap_or(4.0),
            body: flags.body.clone().or(file.body),
            dims: non_empty(flags.dims.clone())
                .or(file.dims)
                .unwrap_or_else(|| vec![3, 4, 5, 7]),
            k_max: flags.k_max.or(file.k_max).unwrap_or(20),
            axes: non_empty(flags.axes.clone())
                .or(file.axes)
                .unwrap_or_else(|| vec![1.2, 1.0, 0.8]),
            ns: non_empty(flags.ns.clone())
                .or(file.ns)
                .unwrap_or_else(default_multiplier_ns),
            corpus_size: flags.corpus_size.or(file.corpus_size).unwrap_or(50),
            decay: flags.decay.or(file.decay).unwrap_or(1.0),
            trials: flags.trials.or(file.trials).unwrap_or(3),
            resolution: flags.resolution.or(file.resolution).unwrap_or(2000),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if self.dim < 3 {
            return bad(format!("dim must be at least 3, got {}", self.dim));
        }
        if self.band_limit < 4 {
            return bad(format!(
                "band-limit must be at least 4, got {}",
                self.band_limit
            ));
        }
        if self.representation == Representation::S2 && self.dim != 3 {
            return bad(format!(
                "the s2 representation needs dim 3, got {}",
                self.dim
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.steps < 1 {
            return bad("steps must be at least 1".into());
        }
        if !(self.stop_tol > 0.0) {
            return bad(format!("stop-tol must be positive, got {}", self.stop_tol));
        }
        if self.format.is_empty() {
            return bad("at least one output format is required".into());
        }
        if self.dims.iter().any(|&d| d < 3) {
            return bad(format!("dims must all be at least 3, got {:?}", self.dims));
        }
        if self.axes.len() < 3 || self.axes.iter().any(|&a| !(a > 0.0)) {
            return bad(format!(
                "axes must be at least 3 positive numbers, got {:?}",
                self.axes
            ));
        }
        if self.ns.contains(&0) {
            return bad("ns must be positive".into());
        }
        if self.trials == 0 || self.corpus_size == 0 {
            return bad("trials and corpus-size must be positive".into());
        }
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.format.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_parse() {
        assert_eq!(parse_term("4:0.5"), Ok((4, 0.5)));
        assert!(parse_term("4").is_err());
        assert!(parse_term("x:1").is_err());
    }

    #[test]
    fn file_config_accepts_presets_and_terms() {
        let f: FileConfig =
            toml::from_str("perturbation = \"random-even\"\nrepresentation = \"s2\"").unwrap();
        assert_eq!(
            f.perturbation,
            Some(Perturbation::Preset(Preset::RandomEven))
        );
        assert_eq!(f.representation, Some(Representation::S2));
        let f: FileConfig = toml::from_str("perturbation = [[4, 1.0], [6, 0.5]]").unwrap();
        assert_eq!(
            f.perturbation,
            Some(Perturbation::Terms(vec![(4, 1.0), (6, 0.5)]))
        );
        assert!(toml::from_str::<FileConfig>("dimension = 3").is_err());
    }

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::resolve("iterate", &Flags::default()).unwrap();
        assert_eq!(cfg.band_limit, 32);
        assert!(cfg.kill_h2);
        assert_eq!(
            RunConfig::resolve("multiplier-bound", &Flags::default())
                .unwrap()
                .band_limit,
            128
        );
        let flags = Flags {
            representation: Some(ReprArg::S2),
            dim: Some(4),
            ..Default::default()
        };
        assert!(RunConfig::resolve("iterate", &flags).is_err());
    }
}
