mod cmd;
mod failure;
mod manifest;
mod snapshot;
mod suite;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use crate::cmd::Cli;
use crate::failure::{exit_code, invalid};

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "GCF_THREADS";

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| invalid(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| cmd::dispatch(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
