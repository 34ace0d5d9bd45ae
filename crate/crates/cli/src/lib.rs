//! Command-line driver: field decomposition, projection/convolution checks,
//! full Maxwell runs and causality reports.
//!
//! Exit codes: 0 pass, 1 quantitative failure, 2 usage, I/O or precondition error.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::run;
pub use config::{RunConfig, SourceKind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] helmfield_core::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

pub fn exit_code(result: &Result<Status, CliError>) -> i32 {
    match result {
        Ok(Status::Pass) => EXIT_PASS,
        Ok(Status::Fail) => EXIT_FAIL,
        Err(_) => EXIT_ERROR,
    }
}

#[derive(Debug, Parser)]
#[command(name = "helmfield", version, about = "Helmholtz decomposition and retarded field laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a vector field into longitudinal and transverse parts.
    Decompose(DecomposeArgs),
    /// Same as `decompose --oracle`.
    Oracle(DecomposeArgs),
    /// Check that projection commutes with space-time convolution.
    Lemma(LemmaArgs),
    /// Run every field construction for a configured source and check the residuals.
    Simulate(RunArgs),
    /// Measure front arrivals and outside-cone cancellation of a switch-on run.
    Causality(RunArgs),
    /// Print the default run configuration.
    InitConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    /// Band-limited random periodic field.
    Random,
    /// Gradient of a Gaussian.
    Gradient,
    /// Gaussian swirl around a random axis.
    Curl,
    /// Random mixture of the two localized kinds.
    Mix,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposeArgs {
    /// Vector field file to split.
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    pub input: Option<PathBuf>,
    /// Generate the input instead of reading it.
    #[arg(long, value_enum)]
    pub generate: Option<Generator>,
    /// Cells per axis of a generated field.
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    /// Box length of a generated field.
    #[arg(long = "box", default_value_t = 16.0)]
    pub box_len: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Fraction of the Nyquist wavenumber kept by the random generator.
    #[arg(long, default_value_t = 0.5)]
    pub cutoff: f64,
    /// Width of the localized generators.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Output prefix; writes `<out>_par.vf` and `<out>_perp.vf`.
    #[arg(long, default_value = "field")]
    pub out: PathBuf,
    /// Bound on the reconstruction residual.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Also compare against the real-space direct integral.
    #[arg(long)]
    pub oracle: bool,
    /// Upsampling factor of the direct integral.
    #[arg(long, default_value_t = 2)]
    pub refine: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub oracle_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelChoice {
    Gaussian,
    Delta,
    Retarded,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct LemmaArgs {
    #[arg(long, value_enum, default_value_t = KernelChoice::Gaussian)]
    pub kernel: KernelChoice,
    /// Cells per axis.
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    /// Time levels.
    #[arg(long, default_value_t = 16)]
    pub nt: usize,
    #[arg(long = "box", default_value_t = 16.0)]
    pub box_len: f64,
    #[arg(long, default_value_t = 0.25)]
    pub dt: f64,
    /// First seed; runs `seeds` consecutive seeds.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0.5)]
    pub cutoff: f64,
    #[arg(long, default_value_t = 2.0)]
    pub space_sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    pub time_sigma: f64,
    /// Bound for the gaussian and delta kernels.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Bound for the retarded kernel.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_retarded: f64,
    #[arg(long, default_value = "lemma.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Run configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `out_dir` from the configuration.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
