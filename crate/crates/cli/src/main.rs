use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use corrlab_cli::{CliError, ExperimentConfig, KINDS};

#[derive(Parser)]
#[command(name = "corrlab", version, about = "Corrector statistics experiments for random potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (defaults to the available parallelism).
        #[arg(long)]
        workers: Option<usize>,
        /// Directory for report.csv, report.json, summary.txt and config.json.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Suppress the summary on stdout.
        #[arg(long)]
        quiet: bool,
    },
    /// List experiment kinds with their default parameters.
    List,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::List => {
            let mut text = String::new();
            for (kind, description) in KINDS {
                let defaults = ExperimentConfig::default_for(kind).expect("listed kind has defaults");
                text += &format!("{kind}: {description}\n{}\n\n", defaults.to_json());
            }
            emit(&text);
            Ok(())
        }
        Command::Run {
            config,
            workers,
            out_dir,
            quiet,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
            let cfg = ExperimentConfig::parse(&text)?;
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let report = corrlab_cli::run(&cfg, workers)?;
            if let Some(dir) = out_dir {
                report.write(&dir, &cfg.to_json())?;
            }
            if !quiet {
                emit(&report.summary());
            }
            Ok(())
        }
    }
}

/// Print to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}
