use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nitsche_fem::cli::{self, PartialConfig};

/// Finite element solver for diffusion-reaction problems whose Dirichlet
/// boundary data jumps at marked boundary points.
#[derive(Parser)]
#[command(name = "nitsche-fem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study for a registered case and write its outputs.
    Solve(SolveArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// JSON configuration file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Registered case name (paper-3-3, smooth-sine, linear-patch).
    #[arg(long)]
    case: Option<String>,
    /// Element family: p1 (triangles) or q1 (quadrilaterals).
    #[arg(long)]
    element: Option<String>,
    /// Number of uniform refinement levels to run.
    #[arg(long)]
    levels: Option<usize>,
    /// Nitsche penalty parameter.
    #[arg(long)]
    gamma: Option<f64>,
    /// Relative residual tolerance of the linear solver.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory (created if absent; files are overwritten).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write a plain-text dump of the finest mesh.
    #[arg(long)]
    dump_mesh: bool,
    /// Write the finest assembled matrix and right-hand side.
    #[arg(long)]
    dump_system: bool,
    /// Write the finest solution sampled on a uniform grid.
    #[arg(long)]
    dump_solution: bool,
    /// Write a log-log error plot with a slope-2 reference line.
    #[arg(long)]
    plot: bool,
}

impl SolveArgs {
    fn into_partial(self) -> Result<PartialConfig, nitsche_fem::FemError> {
        let from_flags = PartialConfig {
            case: self.case,
            element: self.element,
            levels: self.levels,
            gamma: self.gamma,
            tol: self.tol,
            output: self.output,
            dump_mesh: self.dump_mesh.then_some(true),
            dump_system: self.dump_system.then_some(true),
            dump_solution: self.dump_solution.then_some(true),
            plot: self.plot.then_some(true),
        };
        Ok(match self.config {
            Some(path) => from_flags.or(PartialConfig::from_file(&path)?),
            None => from_flags,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => args
            .into_partial()
            .and_then(|partial| partial.resolve())
            .and_then(|config| cli::run(&config).map(|_| ())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
