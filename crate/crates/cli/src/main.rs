//! `mif`: command-line front end for multidimensional iterative filtering.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
//! failure.

mod commands;
mod config;
mod raster;

use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AceOptions, RenderMode, SectionSpec, SynthKind};
use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] mif_core::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numeric() => 2,
            CliError::Verification(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "mif", version, about = "Multidimensional iterative filtering")]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key; repeatable, wins over --config.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic signal and its ground-truth components.
    Synth {
        #[arg(value_enum)]
        kind: SynthKind,
        /// Grid side length for the 2D examples.
        #[arg(long, default_value_t = 256)]
        size: usize,
    },
    /// Decompose a grid into IMFs and a remainder.
    Decompose {
        input: PathBuf,
        /// Fail if the IMFs and remainder do not sum back to the input.
        #[arg(long)]
        verify: bool,
    },
    /// Score a hyperspectral cube against a target signature.
    Ace {
        cube: PathBuf,
        signature: PathBuf,
        /// Remove the first IMF from every channel before scoring.
        #[arg(long)]
        preprocess: bool,
        /// Remove the first IMF from the score map.
        #[arg(long)]
        postprocess: bool,
        /// Base name of the output files.
        #[arg(long, default_value = "ace")]
        name: String,
    },
    /// Render a grid as a grayscale raster or extract a 1D section.
    Render {
        grid: PathBuf,
        #[arg(value_enum)]
        mode: RenderMode,
        /// Section axis (default: last).
        #[arg(long)]
        axis: Option<usize>,
        /// Fixed indices of the other axes, comma separated (default: centre).
        #[arg(long, value_delimiter = ',')]
        at: Vec<usize>,
        /// Section along the anti-diagonal of a square grid.
        #[arg(long)]
        anti_diagonal: bool,
        /// Also draw the section as a line raster.
        #[arg(long)]
        plot: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("MIF_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("MIF_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let config = RunConfig::load(cli.config.as_deref(), &cli.set)?;
    match cli.command {
        Command::Synth { kind, size } => {
            for path in commands::synth(kind, size, &config)? {
                println!("{}", path.display());
            }
        }
        Command::Decompose { input, verify } => {
            print!("{}", commands::decompose(&input, verify, &config)?);
        }
        Command::Ace {
            cube,
            signature,
            preprocess,
            postprocess,
            name,
        } => {
            let options = AceOptions {
                preprocess,
                postprocess,
                name,
            };
            print!("{}", commands::ace(&cube, &signature, &options, &config)?);
        }
        Command::Render {
            grid,
            mode,
            axis,
            at,
            anti_diagonal,
            plot,
            output,
        } => {
            let spec = SectionSpec {
                axis,
                at,
                anti_diagonal,
                plot,
            };
            for path in commands::render(&grid, mode, &spec, output.as_deref(), &config)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
