//! Command-line front end: every computation writes CSV or JSON for offline
//! plotting.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use thiserror::Error;

use output::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pdkernel::Error),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(pdkernel::Error::Domain(_)) => "domain",
            CliError::Core(pdkernel::Error::LinearDependence { .. }) => "linear_dependence",
            CliError::Core(pdkernel::Error::MissingMeasure) => "missing_measure",
            CliError::Core(pdkernel::Error::Parse(_)) => "parse",
            CliError::Core(_) => "numerical",
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
            CliError::Check(_) => "check_failed",
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "pdkernel", version, about = "Positive definite kernels on an interval: spectra, extensions, bases")]
pub struct Cli {
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues Λ_θ of the self-adjoint extension with parameter θ.
    Spectrum(SpectrumArgs),
    /// Samples of a type-1 (θ) or type-2 (r) extension of e^{-|x|}.
    Extend(ExtendArgs),
    /// Nyström eigenvalues, transcendental roots and the trace check.
    Mercer(MercerArgs),
    /// Dyadic basis table and sampled basis functions.
    Onb(OnbArgs),
    /// Second-moment verdicts and deficiency indices.
    Moments(MomentsArgs),
    /// Degree of concentration q and dispersion of probability measures.
    Concentration(ConcentrationArgs),
    /// F_φ(x) computed through the extension spectrum.
    Sample(SampleArgs),
    /// Discrete isometry between kernel sections and the spectral measure.
    Isometry(IsometryArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Branches −N..=N.
    #[arg(long = "n", default_value_t = 10)]
    pub n: usize,
    /// Also write the two curves whose crossings are the eigenvalues.
    #[arg(long)]
    pub curves: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("family").required(true).args(["theta", "r"])))]
pub struct ExtendArgs {
    #[arg(long, default_value = "exp")]
    pub kernel: String,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long = "n", default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    pub xmin: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub xmax: f64,
    #[arg(long, default_value_t = 801)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct MercerArgs {
    #[arg(long, default_value = "exp")]
    pub kernel: String,
    #[arg(long, default_value_t = 800)]
    pub nodes: usize,
    /// Number of eigenvalues compared with the transcendental roots.
    #[arg(long = "n", default_value_t = 5)]
    pub n: usize,
    /// Also write the samplings of the two curves of the root equation.
    #[arg(long)]
    pub curves: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OnbArgs {
    #[arg(long, default_value = "triangle")]
    pub kernel: String,
    #[arg(long, default_value_t = 3)]
    pub depth: u32,
    /// Also write the basis functions sampled on a uniform grid.
    #[arg(long)]
    pub functions: Option<PathBuf>,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Kernel specs; `--kernel` with no value gives an empty table.
    #[arg(long, num_args = 0.., value_delimiter = ',')]
    pub kernel: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct ConcentrationArgs {
    /// JSON files {"a": .., "density": [..], "atoms": [[x, w], ..]}.
    #[arg(required = true)]
    pub measures: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long = "n", default_value_t = 200)]
    pub n: usize,
    /// CSV rows (y, φ(y)) on a uniform grid of [0, 1]; a smooth bump when omitted.
    #[arg(long)]
    pub phi: Option<PathBuf>,
    /// Interior evaluation points x = i/(samples + 1).
    #[arg(long, default_value_t = 9)]
    pub samples: usize,
    #[arg(long, default_value_t = 401)]
    pub nodes: usize,
}

#[derive(Debug, Args)]
pub struct IsometryArgs {
    #[arg(long, default_value = "exp")]
    pub kernel: String,
    #[arg(long, value_delimiter = ',', default_value = "0,0.3333333333333333,0.5")]
    pub points: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command, cli.format).and_then(|o| {
        output::emit(cli.out.as_deref(), &o.bytes)?;
        match o.failed_check {
            Some(msg) => Err(CliError::Check(msg)),
            None => Ok(()),
        }
    }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(if matches!(e, CliError::Check(_)) { 1 } else { 2 })
        }
    }
}
