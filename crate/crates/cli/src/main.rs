use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use isac_cli::config::{ExperimentKind, Overrides, Profile};
use isac_cli::{plot, run_file, run_kind, validate, CliError};

/// Sparse OFDM sensing experiments.
#[derive(Debug, Parser)]
#[command(name = "isac", version, about)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Master seed, overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overrides the config.
    #[arg(long, global = true, env = "ISAC_OUT_DIR")]
    out: Option<PathBuf>,
    /// Defaults for anything the config leaves out.
    #[arg(long, global = true, value_enum)]
    profile: Option<Profile>,
    /// Worker threads, 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment a config file describes.
    Run {
        #[arg(long, short)]
        config: PathBuf,
    },
    /// Check a config without running anything.
    Validate {
        #[arg(long, short)]
        config: PathBuf,
    },
    /// CRLB table for several allocations.
    Crlb {
        #[arg(long, short)]
        config: Option<PathBuf>,
    },
    /// RMSE and PSLR against SNR.
    Sweep {
        #[arg(long, short)]
        config: Option<PathBuf>,
    },
    /// Two-target direct against virtual detection.
    Demo {
        #[arg(long, short)]
        config: Option<PathBuf>,
    },
    /// Print a matplotlib script for an experiment's outputs.
    PlotScript {
        #[arg(value_parser = parse_kind)]
        experiment: ExperimentKind,
    },
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    s.parse()
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    if cli.global.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
        {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    let ov = Overrides {
        seed: cli.global.seed,
        output_dir: cli.global.out.clone(),
        profile: cli.global.profile,
    };

    let written = match &cli.command {
        Command::Run { config } => run_file(config, &ov),
        Command::Crlb { config } => run_kind(ExperimentKind::CrlbTable, config.as_deref(), &ov),
        Command::Sweep { config } => run_kind(ExperimentKind::RmsePslrSweep, config.as_deref(), &ov),
        Command::Demo { config } => run_kind(ExperimentKind::TwoTargetDemo, config.as_deref(), &ov),
        Command::Validate { config } => {
            return match validate(config, &ov) {
                Ok(issues) if issues.is_empty() => ExitCode::SUCCESS,
                Ok(issues) => {
                    for i in issues {
                        println!("{i}");
                    }
                    ExitCode::from(2)
                }
                Err(e) => report(&e),
            };
        }
        Command::PlotScript { experiment } => {
            print!("{}", plot::script(*experiment));
            return ExitCode::SUCCESS;
        }
    };
    match written {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => report(&e),
    }
}
