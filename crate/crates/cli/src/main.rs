//! `radsplit`: discrete Radon transforms, inversion, large-time-step
//! solves, displacement interpolation and error studies from the shell.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage or configuration
//! error (including missing inputs), 3 I/O error.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "radsplit",
    version,
    about = "Discrete Radon transform toolkit and large-time-step solver"
)]
struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply a transform or its adjoint to a file.
    Transform(TransformArgs),
    /// Least-squares inversion of a 2D sinogram.
    Invert(InvertArgs),
    /// Run a solver configuration file.
    Solve(SolveArgs),
    /// Error studies of the cosine-hump acoustics problem.
    #[command(subcommand)]
    Study(StudyCommand),
    /// Displacement interpolation between two grids.
    Interp(InterpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Operator {
    /// 2D forward transform: grid (.csv, .rsg) to sinogram (.rss, .csv).
    Fwd,
    /// 2D adjoint: sinogram (.rss, .csv) to grid (.csv, .rsg, .pgm).
    Adj,
    /// 3D forward transform: grid (.rsg3) to sinogram (.rs3).
    Fwd3,
    /// 3D adjoint: sinogram (.rs3) to grid (.rsg3).
    Adj3,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(value_enum)]
    pub op: Operator,
    pub input: PathBuf,
    pub output: PathBuf,
    /// Half-width of the output grid for adjoints.
    #[arg(long = "L", default_value_t = 4.0, value_name = "L")]
    pub half_width: f64,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// Sinogram (.rss or .csv).
    pub input: PathBuf,
    /// Recovered grid (.csv, .rsg or .pgm).
    pub output: PathBuf,
    /// Target grid size; defaults to the sinogram size over 2p.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "L", default_value_t = 4.0, value_name = "L")]
    pub half_width: f64,
    /// Prolongation factor is 2p.
    #[arg(long = "oversample-p", default_value_t = 2)]
    pub oversample_p: usize,
    /// Relative CG residual to stop at.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// CG iteration cap; defaults to 10n.
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Write the relative residual after each iteration to this CSV.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// JSON configuration (see the guide for the schema).
    pub config: PathBuf,
    /// Directory for snapshots and the manifest.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reference {
    /// Same solver on a domain twice as wide.
    Wide,
    /// Radially symmetric 1D reference run.
    Radial,
}

#[derive(Debug, Subcommand)]
pub enum StudyCommand {
    /// Weighted diagonal errors for a sequence of grid sizes.
    Convergence(ConvergenceArgs),
    /// Error history near an absorbing boundary.
    BoundaryDecay(DecayArgs),
}

#[derive(Debug, Args)]
pub struct StudyOptions {
    #[arg(long = "oversample-p", default_value_t = 2)]
    pub oversample_p: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    /// Grid sizes: a range of powers of two `8..256` or a list `8,16,32`.
    #[arg(long = "Ns", value_name = "NS", default_value = "8..256")]
    pub ns: String,
    /// Final time.
    #[arg(long = "T", default_value_t = 3.0, value_name = "T")]
    pub t: f64,
    #[command(flatten)]
    pub opts: StudyOptions,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// Final time.
    #[arg(long = "T", default_value_t = 20.0, value_name = "T")]
    pub t: f64,
    /// Spacing of the output times `dt, 2dt, …, T`.
    #[arg(long, default_value_t = 0.5)]
    pub dt: f64,
    /// Explicit output times, overriding `--T` and `--dt`.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Reference::Wide)]
    pub reference: Reference,
    #[command(flatten)]
    pub opts: StudyOptions,
}

#[derive(Debug, Args)]
pub struct InterpArgs {
    /// Grid at the first time (.csv or .rsg).
    pub first: PathBuf,
    /// Grid at the second time.
    pub second: PathBuf,
    /// Interpolation parameters in [0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    pub tau: Vec<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Grid file extension for the results: csv, rsg or pgm.
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long = "oversample-p", default_value_t = 2)]
    pub oversample_p: usize,
    /// Most pieces per transform slice.
    #[arg(long = "k-max", default_value_t = 4)]
    pub k_max: usize,
    /// Relative slice residual at which fitting stops.
    #[arg(long = "fit-tol", default_value_t = 1e-3)]
    pub fit_tol: f64,
    /// Relative CG residual of the inversion.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    match cli.command {
        Command::Transform(a) => commands::transform(&a),
        Command::Invert(a) => commands::invert(&a),
        Command::Solve(a) => commands::solve(&a, cli.threads),
        Command::Study(StudyCommand::Convergence(a)) => commands::convergence(&a),
        Command::Study(StudyCommand::BoundaryDecay(a)) => commands::boundary_decay(&a),
        Command::Interp(a) => commands::interp(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
