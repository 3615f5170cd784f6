//! Command-line parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{gen_impedances, optimize_cmd, sweep_spacing_cmd, Overrides};
use crate::config::ScenarioConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ris-opt", version, about = "Optimize RIS load reactances for received power")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize (or load from cache) the impedances and write impedances.json.
    GenImpedances {
        #[command(flatten)]
        common: Common,
    },
    /// Optimize the loads; writes trace.csv and summary.json.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Ignore RIS mutual coupling while optimizing.
        #[arg(long)]
        coupling_unaware: bool,
        /// Override optimizer.max_outer_iters.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Fixed-aperture sweep over element spacing; writes sweep_spacing.csv.
    SweepSpacing {
        #[command(flatten)]
        common: Common,
        /// Sweep points computed concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Override optimizer.max_outer_iters.
        #[arg(long)]
        max_iters: Option<usize>,
    },
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenImpedances { common } => {
            let cfg = ScenarioConfig::load(&common.config)?;
            let path = gen_impedances(&cfg, &common.out)?;
            println!("{}", path.display());
        }
        Command::Optimize {
            common,
            coupling_unaware,
            max_iters,
        } => {
            let cfg = ScenarioConfig::load(&common.config)?;
            let overrides = Overrides {
                coupling_unaware,
                max_iters,
            };
            let s = optimize_cmd(&cfg, &common.out, overrides)?;
            println!(
                "N = {}, {} iterations ({:?}), objective {:e} -> {:e}, evaluated {:e}",
                s.n_ris,
                s.iterations,
                s.stop_reason,
                s.initial_objective,
                s.final_objective,
                s.evaluated_objective
            );
        }
        Command::SweepSpacing {
            common,
            jobs,
            max_iters,
        } => {
            let cfg = ScenarioConfig::load(&common.config)?;
            let overrides = Overrides {
                coupling_unaware: false,
                max_iters,
            };
            for r in sweep_spacing_cmd(&cfg, &common.out, jobs, overrides)? {
                println!(
                    "spacing {} λ: N = {}, aware {:e}, unaware {:e}",
                    r.spacing, r.n_ris, r.objective_aware, r.objective_unaware
                );
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
