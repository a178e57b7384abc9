//! Batch front end: configuration parsing, subcommand orchestration,
//! reproducible outputs.
//!
//! Exit code contract (CI asserts the energy inequalities through it):
//!   0  run completed and every check passed
//!   1  usage, configuration, or input-data error
//!   2  a numerical check failed (estimate residual, envelope, Gram, sweep)
//!   3  numerical blowup (non-finite coefficients during integration)

mod commands;

use clap::{Args, Parser, Subcommand};
use energyeq_core::Error;
use std::path::PathBuf;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

#[derive(Parser)]
#[command(
    name = "energyeq",
    version,
    about = "Spectral Galerkin solver for the 2-D energy equation with mixed boundary conditions, plus its verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (flat key = value lines, dotted sections).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. --set solver.m=64 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory; overrides output.directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Dump eigenpair diagnostics (analytic and finite-difference) as CSV.
    Eigs {
        #[command(flatten)]
        common: CommonArgs,
        /// Mesh intervals of the finite-difference eigenvalue oracle.
        #[arg(long, default_value_t = 128)]
        oracle_n: usize,
    },
    /// Solve the wall-temperature lifting and emit its samples and
    /// Sobolev report.
    Lift {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Integrate the full problem and check every energy estimate.
    Run {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the basis-size sweep and the convergence monitor.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap would exit 2 on its own; keep 2 reserved for failed
            // numerical checks.
            let _ = err.print();
            return if err.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    let result = match cli.command {
        Command::Eigs { common, oracle_n } => {
            commands::load(&common).and_then(|ctx| commands::eigs::execute(&ctx, oracle_n))
        }
        Command::Lift { common } => {
            commands::load(&common).and_then(|ctx| commands::lift::execute(&ctx))
        }
        Command::Run { common } => {
            commands::load(&common).and_then(|ctx| commands::run::execute(&ctx))
        }
        Command::Sweep { common } => {
            commands::load(&common).and_then(|ctx| commands::sweep::execute(&ctx))
        }
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Blowup { .. } => EXIT_BLOWUP,
                _ => EXIT_USAGE,
            }
        }
    }
}
