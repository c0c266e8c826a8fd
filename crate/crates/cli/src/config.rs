//! Command-line flags, the optional TOML config file and their validated
//! merge. Flags take precedence over file values.

use std::path::{Path, PathBuf};

use backbone_core::backbone::{default_lambda_grid, DEFAULT_THRESHOLD};
use backbone_core::ingest::{Cutoff, Delimiter};
use backbone_core::removal::DEFAULT_STEPS;
use backbone_core::Algorithm;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "backbone",
    version,
    about = "Information backbone extraction for user-item networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and split a rating file, writing the training and probe sets.
    Ingest(Flags),
    /// Run removal algorithms over all macro-steps and write one trace each.
    Sweep(Flags),
    /// Extract the information backbone with the hybrid method.
    Backbone(Flags),
    /// Structure indices of a single edge list.
    Stats(Flags),
    /// Comparison table of the original graph and each algorithm at one step.
    Report(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Sweep(_) => "sweep",
            Command::Backbone(_) => "backbone",
            Command::Stats(_) => "stats",
            Command::Report(_) => "report",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Ingest(f) | Command::Sweep(f) | Command::Backbone(f) | Command::Stats(f) | Command::Report(f) => f,
        }
    }
}

/// Every setting, as given on the command line or in the config file. All
/// fields are optional so the two sources can be layered.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// Rating file (`user item [rating] timestamp` per line).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Field delimiter: ws, csv or coloncolon.
    #[arg(long)]
    pub format: Option<String>,
    /// Skip malformed lines instead of failing.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub lenient: Option<bool>,
    /// Training cutoff: epoch seconds, or a percentage of records such as 90%.
    #[arg(long)]
    pub cutoff: Option<String>,
    /// Probe set size as a fraction of the training links.
    #[arg(long = "probe-ratio")]
    pub probe_ratio: Option<f64>,
    /// Discard ratings below this value.
    #[arg(long = "rating-min")]
    pub rating_min: Option<f64>,
    /// Comma-separated removal algorithms, e.g. SOR,MPR,HYBRID:0.5.
    #[arg(long)]
    pub algos: Option<String>,
    /// Comma-separated λ values for backbone extraction.
    #[arg(long = "lambda-grid")]
    pub lambda_grid: Option<String>,
    /// Recommendation list length.
    #[arg(long = "L")]
    #[serde(rename = "L", alias = "l")]
    pub l: Option<usize>,
    /// Fraction of the initial AUC a backbone must keep.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of macro-steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Compute structure indices at every macro-step.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub structure: Option<bool>,
    /// Largest number of user pairs for exact H(L); above it pairs are sampled.
    #[arg(long = "hamming-cap")]
    pub hamming_cap: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Macro-step at which `report` snapshots each algorithm.
    #[arg(long = "at-step")]
    pub at_step: Option<usize>,
    /// TOML file with the same keys as the flags (underscores for dashes).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Flags {
    /// `self` with every unset field taken from `file`.
    pub fn or(self, file: Flags) -> Flags {
        Flags {
            input: self.input.or(file.input),
            format: self.format.or(file.format),
            lenient: self.lenient.or(file.lenient),
            cutoff: self.cutoff.or(file.cutoff),
            probe_ratio: self.probe_ratio.or(file.probe_ratio),
            rating_min: self.rating_min.or(file.rating_min),
            algos: self.algos.or(file.algos),
            lambda_grid: self.lambda_grid.or(file.lambda_grid),
            l: self.l.or(file.l),
            threshold: self.threshold.or(file.threshold),
            seed: self.seed.or(file.seed),
            steps: self.steps.or(file.steps),
            structure: self.structure.or(file.structure),
            hamming_cap: self.hamming_cap.or(file.hamming_cap),
            out: self.out.or(file.out),
            workers: self.workers.or(file.workers),
            at_step: self.at_step.or(file.at_step),
            config: self.config,
        }
    }
}

pub fn parse_config_file(text: &str) -> Result<Flags, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {}", e.message())))
}

/// Comma-separated algorithm names; duplicates are an error.
pub fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>, CliError> {
    let mut out: Vec<Algorithm> = Vec::new();
    for part in s.split(',') {
        let alg: Algorithm = part.parse().map_err(|e| CliError::Config(format!("--algos: {e}")))?;
        if out.iter().any(|a| a.slug() == alg.slug()) {
            return Err(CliError::Config(format!("--algos: {alg} listed twice")));
        }
        out.push(alg);
    }
    Ok(out)
}

/// Comma-separated λ values in [0, 1], without duplicates.
pub fn parse_lambda_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let mut out: Vec<f64> = Vec::new();
    for part in s.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("--lambda-grid: {part:?} is not a number")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Config(format!("--lambda-grid: {v} is outside [0, 1]")));
        }
        if out.contains(&v) {
            return Err(CliError::Config(format!("--lambda-grid: {v} listed twice")));
        }
        out.push(v);
    }
    Ok(out)
}

/// The validated configuration. Serialised into manifests and hashed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub input: PathBuf,
    pub format: Delimiter,
    pub lenient: bool,
    pub cutoff: Option<String>,
    pub probe_ratio: Option<f64>,
    pub rating_min: Option<f64>,
    pub algos: Vec<Algorithm>,
    pub lambda_grid: Vec<f64>,
    #[serde(rename = "L")]
    pub l: usize,
    pub threshold: f64,
    pub seed: u64,
    pub steps: usize,
    pub structure: bool,
    pub hamming_cap: usize,
    pub at_step: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip)]
    pub cutoff_spec: Cutoff,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Settings {
    pub fn resolve(flags: Flags) -> Result<Settings, CliError> {
        let flags = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
                flags.or(parse_config_file(&text)?)
            }
            None => flags,
        };
        let input = flags.input.ok_or_else(|| config_err("--input is required"))?;
        let format = match &flags.format {
            Some(f) => f.parse().map_err(|e| config_err(format!("--format: {e}")))?,
            None => Delimiter::Whitespace,
        };
        let cutoff_spec = match &flags.cutoff {
            Some(c) => c.parse().map_err(|e| config_err(format!("--cutoff: {e}")))?,
            None => Cutoff::Fraction(0.9),
        };
        if let Some(r) = flags.probe_ratio {
            if !r.is_finite() || r < 0.0 {
                return Err(config_err(format!("--probe-ratio must be non-negative, got {r}")));
            }
        }
        if let Some(r) = flags.rating_min {
            if !r.is_finite() {
                return Err(config_err("--rating-min must be finite"));
            }
        }
        let algos = match &flags.algos {
            Some(s) => parse_algorithms(s)?,
            None => Algorithm::BASIC.to_vec(),
        };
        let lambda_grid = match &flags.lambda_grid {
            Some(s) => parse_lambda_grid(s)?,
            None => default_lambda_grid(),
        };
        let l = flags.l.unwrap_or(20);
        if l == 0 {
            return Err(config_err("--L must be at least 1"));
        }
        let threshold = flags.threshold.unwrap_or(DEFAULT_THRESHOLD);
        if !threshold.is_finite() || threshold < 0.0 {
            return Err(config_err(format!("--threshold must be non-negative, got {threshold}")));
        }
        let steps = flags.steps.unwrap_or(DEFAULT_STEPS);
        if steps == 0 {
            return Err(config_err("--steps must be at least 1"));
        }
        let hamming_cap = flags.hamming_cap.unwrap_or(1_000_000);
        if hamming_cap == 0 {
            return Err(config_err("--hamming-cap must be at least 1"));
        }
        if flags.workers == Some(0) {
            return Err(config_err("--workers must be at least 1"));
        }
        let at_step = flags.at_step.unwrap_or(steps);
        if at_step > steps {
            return Err(config_err(format!("--at-step {at_step} exceeds --steps {steps}")));
        }
        Ok(Settings {
            input,
            format,
            lenient: flags.lenient.unwrap_or(false),
            cutoff: flags.cutoff,
            probe_ratio: flags.probe_ratio,
            rating_min: flags.rating_min,
            algos,
            lambda_grid,
            l,
            threshold,
            seed: flags.seed.unwrap_or(0),
            steps,
            structure: flags.structure.unwrap_or(false),
            hamming_cap,
            out: flags.out,
            at_step,
            workers: flags.workers,
            cutoff_spec,
        })
    }

    pub fn out_dir(&self) -> Result<&Path, CliError> {
        self.out.as_deref().ok_or_else(|| config_err("--out is required"))
    }
}
