use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use speclink::ErrorKind;

mod commands;

#[derive(Parser)]
#[command(
    name = "speclink",
    version,
    about = "Identify linear PDEs from trajectories via Chebyshev Koopman spectra"
)]
struct Cli {
    /// Directory that relative input and output paths are resolved against.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a PDE with RK4 and write the coefficient trajectory.
    Simulate(SimulateArgs),
    /// Build the equation-driven Koopman matrix exp(dt N) of a PDE.
    Derive(DeriveArgs),
    /// Fit the data-driven Koopman matrix to a trajectory file.
    Estimate(EstimateArgs),
    /// Score two Koopman matrix files against each other.
    Compare(CompareArgs),
    /// Run the candidate x true-PDE confusion experiment.
    Confusion(ConfusionArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// M = 8 per axis, dt = 5e-4, T = 0.5.
    Paper,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Builtin PDE name.
    #[arg(long, conflicts_with = "pde_file")]
    pde: Option<String>,
    /// JSON file with a custom PDE specification.
    #[arg(long)]
    pde_file: Option<PathBuf>,
    /// Pin the reference experiment constants.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Chebyshev resolution per axis.
    #[arg(long = "M", default_value_t = 8)]
    resolution: usize,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long, default_value_t = 5e-4)]
    dt: f64,
    #[arg(long = "cx", default_value_t = 1.0)]
    cx: f64,
    #[arg(long = "cy", default_value_t = 1.0)]
    cy: f64,
    #[arg(long = "nu", default_value_t = 0.1)]
    nu: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IcKind {
    Gaussian,
    RandomSmooth,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Time horizon.
    #[arg(long = "T", default_value_t = 0.5)]
    horizon: f64,
    #[arg(long, value_enum, default_value_t = IcKind::Gaussian)]
    ic: IcKind,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.7)]
    decay: f64,
    #[arg(long, default_value_t = 0.3)]
    width: f64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Propagate with exp(dt N) instead of RK4.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value = "trajectory.json")]
    out: PathBuf,
}

#[derive(Args)]
struct DeriveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "kstar.json")]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Trajectory JSON file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "khat.json")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Equation-driven matrix (the star side of the metrics).
    star: PathBuf,
    /// Data-driven matrix (the hat side of the metrics).
    hat: PathBuf,
}

#[derive(Args)]
struct ConfusionArgs {
    /// Experiment configuration JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::InputData => 3,
        ErrorKind::Numerical => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => commands::simulate(&cli.out_dir, args),
        Command::Derive(args) => commands::derive(&cli.out_dir, args),
        Command::Estimate(args) => commands::estimate(&cli.out_dir, args),
        Command::Compare(args) => commands::compare(&cli.out_dir, args),
        Command::Confusion(args) => commands::confusion(&cli.out_dir, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
