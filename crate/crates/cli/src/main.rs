mod config;
mod plot;
mod replay;
mod train;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TSHC_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "tshc",
    version,
    about = "Train, replay and plot TSHC motion-primitive controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a controller from a TOML run configuration.
    Train {
        config: PathBuf,
        /// Directory for checkpoint, log and summary files.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads for candidate evaluation (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Suppress per-iteration progress lines.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Roll a checkpoint out on one task or setpoint and export the trajectory.
    Replay {
        checkpoint: PathBuf,
        /// Task id from the checkpoint (or from --tasks).
        #[arg(
            long,
            conflicts_with = "setpoint",
            required_unless_present = "setpoint"
        )]
        task: Option<String>,
        /// Target `x,y,psi,v`; entries accept units such as `270deg` or `5km/h`.
        #[arg(long, allow_hyphen_values = true)]
        setpoint: Option<String>,
        /// Serve the reflected goal through steering mirroring.
        #[arg(long)]
        mirror: bool,
        /// Look tasks up in this task-list file instead of the checkpoint.
        #[arg(long)]
        tasks: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Render trajectories as an SVG.
    Plot {
        /// Replay CSV files.
        inputs: Vec<PathBuf>,
        /// Replay every task of this checkpoint instead of (or in addition to) CSV inputs.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Explicit flag, then the environment variable, then the working directory.
pub fn output_dir(flag: Option<&Path>, fallback: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| fallback.map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train {
            config,
            out_dir,
            threads,
            quiet,
        } => train::run(&config, out_dir.as_deref(), threads, quiet),
        Command::Replay {
            checkpoint,
            task,
            setpoint,
            mirror,
            tasks,
            out_dir,
        } => replay::run(&replay::Args {
            checkpoint,
            task,
            setpoint,
            mirror,
            tasks,
            out_dir,
        })
        .map(|()| true),
        Command::Plot {
            inputs,
            checkpoint,
            output,
        } => plot::run(&inputs, checkpoint.as_deref(), &output).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
