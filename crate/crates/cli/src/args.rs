use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csh_core::{NonlinearityKind, SolveOptions};

#[derive(Debug, Parser)]
#[command(
    name = "csh",
    version,
    about = "Maximal solutions of Chern-Simons-Higgs equations on weighted graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve at a fixed coupling λ.
    Solve(SolveArgs),
    /// Bracket the critical coupling λ_c and solve at it.
    Critical(CriticalArgs),
    /// Solve along a range of couplings and write a CSV table.
    Sweep(SweepArgs),
    /// Re-check a stored solve result against its graph.
    Verify(VerifyArgs),
    /// Write a graph from a named family.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Equation {
    Generalized,
    Standard,
}

impl From<Equation> for NonlinearityKind {
    fn from(e: Equation) -> Self {
        match e {
            Equation::Generalized => NonlinearityKind::Generalized,
            Equation::Standard => NonlinearityKind::Standard,
        }
    }
}

/// Graph, equation variant and vortices, shared by the solving commands.
#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Graph file (JSON with `vertices` and `edges`).
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub equation: Equation,
    /// Vortex vertex id; repeat for several vortices.
    #[arg(long = "vortex", required = true)]
    pub vortices: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Stopping tolerance for both the step and the residual.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_iter: usize,
    /// Shift K of the scheme (default: Lipschitz bound + max(1, 0.1λ)).
    #[arg(long)]
    pub shift: Option<f64>,
    /// Divergence floor for min ψ (default: −1e6·(1 + ‖υ₀‖∞)).
    #[arg(long, allow_hyphen_values = true)]
    pub floor: Option<f64>,
}

impl SolverArgs {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            shift: self.shift,
            tol: self.tol,
            max_iter: self.max_iter,
            floor: self.floor,
            ..SolveOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub lambda: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Result file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Width of the final λ_c bracket.
    #[arg(long, default_value_t = 1e-3)]
    pub lambda_tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub lambda_min: f64,
    #[arg(long)]
    pub lambda_max: f64,
    /// Number of evenly spaced couplings, endpoints included.
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Result file written by `csh solve`.
    #[arg(long)]
    pub result: PathBuf,
    /// Largest acceptable residual.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Path,
    Cycle,
    Complete,
    Torus,
    Random,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub family: FamilyName,
    /// `n` for path, cycle and complete; `rows cols` for torus; `n p` for random.
    #[arg(required = true, num_args = 1..=2)]
    pub params: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw edge weights uniformly from [0.5, 2].
    #[arg(long)]
    pub random_weights: bool,
    /// Draw vertex measures uniformly from [0.5, 2].
    #[arg(long)]
    pub random_measure: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
