//! Command-line front end for reduction campaigns.
//!
//! Exit codes: 0 success (and, for `reduce`, converged), 2 for a reduce
//! run that stopped without reaching the tolerance, 1 for any error.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "pmor", version, about = "Greedy frequency-domain model reduction")]
struct Cli {
    /// Cap on rayon worker threads for the estimator sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// off, error, warn, info, debug, or trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured reduction and write trace, state, and summary.
    Reduce {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a stored state against the config's test set.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the configured generator system as a manifest plus matrices.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Basename for the manifest and matrix files.
        #[arg(long, default_value = "system")]
        name: String,
    },
    /// Report estimator summands and surrogate values at supplied points.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        state: PathBuf,
        /// CSV of points: header `im_s[,param...]`, one row per point.
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) =>
        {
            e.exit()
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }

    match run(cli.cmd) {
        Ok(converged) => {
            if converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Dispatch; the returned flag is false only for a non-converged reduce.
fn run(cmd: Cmd) -> pmor::Result<bool> {
    match cmd {
        Cmd::Reduce { config, out, seed } => {
            let (cfg, base) = load(&config)?;
            let out = commands::output_dir(&cfg, &base, out.as_deref())?;
            commands::cmd_reduce(&cfg, &base, &out, seed)
        }
        Cmd::Validate { config, state, out } => {
            let (cfg, base) = load(&config)?;
            let out = commands::output_dir(&cfg, &base, out.as_deref())?;
            commands::cmd_validate(&cfg, &base, &state, &out)?;
            Ok(true)
        }
        Cmd::Generate { config, out, name } => {
            let (cfg, base) = load(&config)?;
            let out = commands::output_dir(&cfg, &base, out.as_deref())?;
            commands::cmd_generate(&cfg, &out, &name)?;
            Ok(true)
        }
        Cmd::Estimate {
            config,
            state,
            points,
            out,
        } => {
            let (cfg, base) = load(&config)?;
            let out = commands::output_dir(&cfg, &base, out.as_deref())?;
            commands::cmd_estimate(&cfg, &base, &state, &points, &out)?;
            Ok(true)
        }
    }
}

fn load(config: &Path) -> pmor::Result<(RunConfig, PathBuf)> {
    let cfg = RunConfig::load(config)?;
    let base = config.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok((cfg, base))
}
