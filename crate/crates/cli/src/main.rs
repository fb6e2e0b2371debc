use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod source;

#[derive(Parser)]
#[command(
    name = "twlab",
    version,
    about = "Pseudohermitian curvature of real hypersurfaces and Brieskorn links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frame, torsion and curvature statistics at sampled surface points.
    Analyze(AnalyzeArgs),
    /// Repeat `analyze` over a range of one family parameter.
    Sweep(SweepArgs),
    /// Curvature of a Brieskorn-Pham link.
    Brieskorn(BrieskornArgs),
    /// Lower and upper bounds on the first positive Kohn Laplacian eigenvalue.
    Lambda1(AnalyzeArgs),
}

#[derive(Args, Clone)]
#[command(group = clap::ArgGroup::new("surface").required(true).args(["family", "rho"]))]
pub struct SourceArgs {
    /// Built-in family: sphere, ellipsoid, perturbed_sphere_E, hartogs, reinhardt.
    #[arg(long)]
    pub family: Option<String>,
    /// Defining function in z1..z9, e.g. "abs2(z1)+abs2(z2)-1".
    #[arg(long)]
    pub rho: Option<String>,
    /// Ambient dimension for --rho (default: largest zK used, at least 2).
    #[arg(long)]
    pub dim: Option<usize>,
    /// "auto", "identity", "diag:a,b,..." or a JSON matrix with real or [re, im] entries.
    #[arg(long, default_value = "auto")]
    pub metric: String,
    /// CR dimension for sphere and perturbed_sphere_E.
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Further parameters as name=value.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
}

#[derive(Args, Clone)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 10)]
    pub dirs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone)]
pub struct OutputArgs {
    /// Report path (stdout when absent).
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Also write the sample records as CSV.
    #[arg(long)]
    pub csv: Option<std::path::PathBuf>,
    /// Exit with status 1 when a reference check fails.
    #[arg(long)]
    pub assert: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Clone)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Use the structure-equation solver (hypersurfaces in C^2 only).
    #[arg(long)]
    pub direct: bool,
}

#[derive(Args, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub analyze: AnalyzeArgs,
    #[arg(long)]
    pub param: String,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    /// Evaluate R on the circle (0, e^{i tau}) with the direct solver.
    #[arg(long)]
    pub at_circle: bool,
}

#[derive(Args, Clone)]
pub struct BrieskornArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub exponents: Vec<u32>,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Brieskorn(a) => commands::brieskorn(a),
        Command::Lambda1(a) => commands::lambda1(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
