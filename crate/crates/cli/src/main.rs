//! `nipfrac`: solve, check and verify impulsive fractional evolution problems.

mod identities;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "nipfrac", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem: trajectory CSV, convergence and contraction reports.
    Solve(ProblemArgs),
    /// Evaluate the contraction constant and the assumption checklist only.
    Check(ProblemArgs),
    /// Run the fractional-calculus and resolvent identity suites.
    VerifyIdentities(OutArgs),
    /// Check and solve the bundled three-impulse heat example.
    ReproduceExample(ExampleArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Problem document (JSON).
    #[arg(long)]
    problem: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct ExampleArgs {
    /// Problem document to use instead of the built-in example.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Picard stopping tolerance on the weighted sup norm.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Nodes per solve interval; impulse intervals get a quarter.
    #[arg(long)]
    mesh_nodes: Option<usize>,
    /// Grading exponent of the meshes toward each left end.
    #[arg(long)]
    grading: Option<f64>,
    /// Override the number of spectral modes.
    #[arg(long)]
    modes: Option<usize>,
    /// Write z(t, v) on this many points of [0, π] instead of coefficients.
    #[arg(long)]
    physical_grid: Option<usize>,
}

impl SolverArgs {
    fn config(self, command: run::CommandKind, problem: Option<PathBuf>) -> run::RunConfig {
        run::RunConfig {
            command,
            problem,
            out: self.out,
            tol: self.tol,
            max_iter: self.max_iter,
            mesh_nodes: self.mesh_nodes,
            grading: self.grading,
            modes: self.modes,
            physical_grid: self.physical_grid,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.command {
        Command::Solve(a) => a.solver.config(run::CommandKind::Solve, Some(a.problem)),
        Command::Check(a) => a.solver.config(run::CommandKind::Check, Some(a.problem)),
        Command::ReproduceExample(a) => a.solver.config(run::CommandKind::ReproduceExample, a.problem),
        Command::VerifyIdentities(a) => run::RunConfig::identities(a.out),
    };
    match run::run(&config) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("{}", run::diagnostic(&e));
            ExitCode::from(run::EXIT_NUMERICAL)
        }
    }
}
