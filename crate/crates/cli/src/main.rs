//! `bimodal-skew`: density grids, moments, modes, sampling, Bayesian fits
//! and the validation suite from the command line.
//!
//! Exit codes: 0 success, 1 identity or fit failure, 2 usage or
//! validation error.

mod commands;
mod ingest;

use std::path::PathBuf;
use std::process::ExitCode;

use bimodal_skew::oracle::check::CheckGroup;
use bimodal_skew::{DistributionSpec, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const SCHEMA: &str = "bimodal-skew/1";

#[derive(Parser, Debug)]
#[command(name = "bimodal-skew", version, about = "Bimodal skewed distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the density on a regular grid.
    Pdf(PdfArgs),
    /// Raw moments E(Y^r) with existence flags.
    Moments(MomentsArgs),
    /// Locate the local maxima of the density.
    Modes(ModesArgs),
    /// Draw random variates.
    Sample(SampleArgs),
    /// Fit a model to one column of CSV data by MCMC.
    Fit(FitArgs),
    /// Run the numerical identity suite.
    Check(CheckArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelArg {
    Bsn,
    Bsstd,
    Bsgt,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    #[arg(long, value_enum, default_value = "bsn")]
    pub model: ModelArg,
    /// Bimodality parameter, α ≥ 0.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Skewness parameter, γ > 0.
    #[arg(long, conflicts_with = "phi", allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Skewness as φ = γ².
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Student degrees of freedom, ν > 2.
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub nu: f64,
    /// Generalized t shape p.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub p: f64,
    /// Generalized t shape q (p·q > 2).
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub sigma: f64,
}

impl SpecArgs {
    pub fn gamma(&self) -> Result<f64, Error> {
        match (self.gamma, self.phi) {
            (Some(g), _) => Ok(g),
            (None, Some(phi)) if phi.is_finite() && phi > 0.0 => Ok(phi.sqrt()),
            (None, Some(phi)) => Err(Error::Domain {
                name: "phi",
                value: phi,
                reason: "must be finite and > 0",
            }),
            (None, None) => Ok(1.0),
        }
    }

    pub fn spec_with_alpha(&self, alpha: f64) -> Result<DistributionSpec, Error> {
        let gamma = self.gamma()?;
        let spec = match self.model {
            ModelArg::Bsn => DistributionSpec::bsn(alpha, gamma)?,
            ModelArg::Bsstd => DistributionSpec::bsstd(alpha, gamma, self.nu)?,
            ModelArg::Bsgt => DistributionSpec::bsgt(alpha, gamma, self.p, self.q)?,
        };
        spec.with_location_scale(self.mu, self.sigma)
    }

    pub fn spec(&self) -> Result<DistributionSpec, Error> {
        self.spec_with_alpha(self.alpha)
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct PdfArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, default_value_t = -8.0, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, default_value_t = 8.0, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    /// Comma-separated α values; emits one density column per value.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub compare: Option<Vec<f64>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Highest order reported.
    #[arg(long, default_value_t = 4)]
    pub max_order: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ModesArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub n: usize,
    /// Seed; drawn from the clock and echoed in the sidecar when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draws go here, one per line, with the sidecar at `<out>.json`.
    /// Without it draws go to standard output and the sidecar to
    /// standard error.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long, value_enum, default_value = "bsn")]
    pub model: ModelArg,
    /// CSV input; the first numeric column is used.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 20_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 5_000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, allow_negative_numbers = true)]
    pub prior_a_phi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub prior_b_phi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub prior_beta_nu: Option<f64>,
    /// Write every retained draw as newline-delimited JSON.
    #[arg(long)]
    pub save_chains: Option<PathBuf>,
    /// Allow the generalized t fit, whose shape updates are an extension.
    #[arg(long)]
    pub enable_extensions: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Comma-separated groups to run.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<CheckGroup>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scale the generalized t standardizing constant (negative control).
    #[arg(long, hide = true, allow_negative_numbers = true)]
    pub corrupt_delta: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Success,
    Failure,
}

/// Errors carry the exit code they map to.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. }
            | Error::RootFinding(_)
            | Error::Divergent { .. }
            | Error::InsufficientDraws { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pdf(a) => commands::pdf(&a),
        Command::Moments(a) => commands::moments(&a),
        Command::Modes(a) => commands::modes(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Check(a) => commands::check(&a),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failure) => ExitCode::from(1),
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
