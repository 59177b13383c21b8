//! `persuade`: solve, verify and simulate dynamic information-design problems.
//!
//! Exit codes: 0 success, 1 invalid input or failed check, 2 infeasible
//! problem, 3 internal error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "persuade", version, about = "Dynamic information design by backward induction")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a problem and write the solution JSON.
    Solve(SolveArgs),
    /// Check a solution's incentive constraints and value tables.
    Verify(VerifyArgs),
    /// Estimate expected rewards by simulation.
    Simulate(SimulateArgs),
    /// Summarize a problem's spaces and common-information tree.
    Inspect(InspectArgs),
    /// Write a generated example problem.
    Example(ExampleArgs),
    /// Test whether beliefs are independent of the strategy profile.
    CheckAssumptions(CheckArgs),
    /// Print a readable summary of a solution.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Solution path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Solve one LP per belief class.
    #[arg(long, overrides_with = "no_memoize")]
    pub memoize: bool,
    #[arg(long = "no-memoize", overrides_with = "memoize")]
    pub no_memoize: bool,
    /// Skip the belief-independence check.
    #[arg(long)]
    pub force: bool,
    #[arg(long, default_value_t = 1e-7)]
    pub tol_feas: f64,
    /// Required margin in the incentive rows.
    #[arg(long, default_value_t = 0.0)]
    pub tol_cisr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// List every infeasible node of the failing level.
    #[arg(long)]
    pub scan_all: bool,
    /// Include wall time in the output (makes it nondeterministic).
    #[arg(long)]
    pub timing: bool,
    /// Keep the raw LP optimum instead of its agent-symmetric average.
    #[arg(long)]
    pub no_symmetrize: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Also enumerate deterministic deviation strategies.
    #[arg(long)]
    pub brute_force: bool,
    #[arg(long, default_value_t = 1e6)]
    pub max_strategies: f64,
    /// Also compare W and V with exact evaluation of the profile.
    #[arg(long)]
    pub values: bool,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub episodes: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Needed with `--node` for levels below the last.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Node key whose LP should be exported.
    #[arg(long, requires = "mps")]
    pub node: Option<String>,
    /// MPS output path for `--node`.
    #[arg(long)]
    pub mps: Option<PathBuf>,
    #[arg(long)]
    pub memoize: bool,
    /// Dump every tree node as JSON instead of the summary.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = 1e-7)]
    pub tol_feas: f64,
    #[arg(long, default_value_t = 0.0)]
    pub tol_cisr: f64,
}

#[derive(Args, Debug)]
pub struct ExampleArgs {
    #[command(subcommand)]
    pub kind: ExampleKind,
}

#[derive(Subcommand, Debug)]
pub enum ExampleKind {
    /// The route-choice congestion game.
    Congestion(CongestionArgs),
    /// A small random instance with strategy-independent beliefs.
    Random(RandomArgs),
}

#[derive(Args, Debug)]
pub struct CongestionArgs {
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    #[arg(long, default_value_t = 1.5)]
    pub a: f64,
    #[arg(long, default_value_t = 1.2)]
    pub theta1: f64,
    #[arg(long, default_value_t = 2.8)]
    pub theta2: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p1: f64,
    #[arg(long, default_value_t = 0.9)]
    pub rho: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    FixedAction,
    JointMessageAction,
    MultiAgent,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Revealing,
    Blind,
}

#[derive(Args, Debug)]
pub struct RandomArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "joint-message-action")]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value = "revealing")]
    pub family: FamilyArg,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Add belief-keyed target overrides.
    #[arg(long)]
    pub overrides: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(commands::run(cli))
}
