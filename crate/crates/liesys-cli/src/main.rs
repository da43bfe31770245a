//! Scenario runner: load a scenario description, execute direct integration
//! and/or group-level solution and/or reduction, emit trajectories and a
//! verification report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use liesys_cli::{config, runner};

#[derive(Parser)]
#[command(name = "liesys", about = "Lie-system scenario runner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of a scenario config and write trajectories + report.
    Run {
        /// Scenario config file.
        config: PathBuf,
        /// Override the integration tolerance of the config.
        #[arg(long)]
        tol: Option<f64>,
        /// Integrate with a fixed classical RK4 step (reproducible output).
        #[arg(long, value_name = "H")]
        fixed_step: Option<f64>,
        /// Override the output directory of the config.
        #[arg(long)]
        out_dir: Option<String>,
        /// Seed for randomized property checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the model catalog.
    ListModels,
    /// Sweep the algebra registry (plus an optional definition file) for
    /// consistency, representation, and group-law violations.
    CheckAlgebras {
        /// Extra algebra definition file (`name`/`dim`/`alpha beta gamma value` records).
        #[arg(long)]
        file: Option<PathBuf>,
        /// Seed for the randomized group-law checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            tol,
            fixed_step,
            out_dir,
            seed,
        } => {
            let cfg = match config::load(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(1);
                }
            };
            let opts = runner::RunOptions {
                tol_override: tol,
                fixed_step,
                out_dir_override: out_dir,
                seed,
            };
            match runner::run(&cfg, &opts) {
                Ok(report) => {
                    print!("{}", report.render());
                    if report.all_passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
        Command::ListModels => {
            print!("{}", runner::catalog());
            ExitCode::SUCCESS
        }
        Command::CheckAlgebras { file, seed } => {
            match runner::check_algebras(file.as_deref(), seed) {
                Ok((text, ok)) => {
                    print!("{text}");
                    if ok {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
