use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rydfloq_cli::{list_experiments, run, Overrides};

#[derive(Parser)]
#[command(name = "rydfloq", version, about = "Floquet-modulated Rydberg controlled-phase gate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML configuration file.
    Run {
        config: PathBuf,
        /// Directory for all artifacts (overrides `output_dir`).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Random seed (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (overrides `threads`).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List experiments, their sections and defaults.
    List,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::List => {
            print!("{}", list_experiments());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            output_dir,
            seed,
            threads,
        } => {
            let overrides = Overrides {
                output_dir,
                seed,
                threads,
            };
            match run(&config, &overrides) {
                Ok(summary) => {
                    println!("{}", summary.output_dir.join("result.json").display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{}", e.record());
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
