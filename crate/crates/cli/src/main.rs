use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ehlab_cli::{emit_plot_scripts, parse_thread_cap, run, CliError, ExperimentConfig, THREADS_VAR};

#[derive(Debug, Parser)]
#[command(name = "ehlab", version, about = "Kicked-rotator ergodic-hierarchy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write gnuplot scripts for the artifacts listed in a run manifest.
    Plot {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let cap = parse_thread_cap(std::env::var(THREADS_VAR).ok().as_deref())?;
    if let Some(n) = cap {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("{THREADS_VAR}: {e}")))?;
    }
    // Dense kernels stay sequential so results do not depend on the thread count.
    faer::set_global_parallelism(faer::Par::Seq);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run { config } => {
            let config = ExperimentConfig::load(&config)?;
            log::info!("running {} into {}", config.experiment.kind(), config.output_dir.display());
            let (manifest, path) = run(&config)?;
            log::info!("finished in {:.3} s", manifest.wall_time_seconds);
            println!("{}", path.display());
        }
        Command::Plot { manifest } => {
            for script in emit_plot_scripts(&manifest)? {
                println!("{}", script.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ehlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
