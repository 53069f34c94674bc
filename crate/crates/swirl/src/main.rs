use std::path::PathBuf;

use clap::{Parser, Subcommand};

use swirl::cli;
use swirl::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "swirl",
    about = "Radially symmetric viscous shallow-water simulator in Lagrangian mass coordinates"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run even when the initial-data hypotheses fail.
        #[arg(long)]
        force: bool,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record diagnostics every K steps (overrides the config).
        #[arg(long)]
        cadence: Option<u64>,
        /// Comma-separated snapshot times (overrides the config).
        #[arg(long, value_delimiter = ',')]
        snapshot_times: Option<Vec<f64>>,
    },
    /// Run the verification property suite.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence studies: manufactured solutions and scheme agreement.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parameter sweep over the [sweep] grid of the config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Concurrent worker limit (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &PathBuf, out: Option<PathBuf>) -> Result<RunConfig, i32> {
    match RunConfig::from_path(path) {
        Ok(mut cfg) => {
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            Ok(cfg)
        }
        Err(e) => {
            eprintln!("config error: {e}");
            Err(cli::exit_code_for(&e))
        }
    }
}

fn main() {
    let args = Args::parse();
    let code = match args.command {
        Command::Run {
            config,
            force,
            out,
            cadence,
            snapshot_times,
        } => match load(&config, out) {
            Ok(mut cfg) => {
                if let Some(k) = cadence {
                    cfg.cadence_steps = Some(k);
                }
                if let Some(times) = snapshot_times {
                    cfg.snapshot_times = times;
                }
                cli::cmd_run(&cfg, force)
            }
            Err(code) => code,
        },
        Command::Verify { config, out } => match load(&config, out) {
            Ok(cfg) => cli::cmd_verify(&cfg),
            Err(code) => code,
        },
        Command::Converge { config, out } => match load(&config, out) {
            Ok(cfg) => cli::cmd_converge(&cfg),
            Err(code) => code,
        },
        Command::Sweep {
            config,
            workers,
            out,
        } => match load(&config, out) {
            Ok(cfg) => cli::cmd_sweep(&cfg, workers),
            Err(code) => code,
        },
    };
    std::process::exit(code);
}
