use std::path::PathBuf;

use anyhow::Result;
use gcf_core::corpus::{CORPUS_SEED_BASE, CORPUS_SIZE};
use gcf_core::montecarlo::MIN_SAMPLES;
use serde::Serialize;

use super::{emit_json, Outcome};
use crate::failure::{invalid, EXIT_OK, EXIT_SUITE};
use crate::manifest::RunManifest;
use crate::suite::{run_suite, Bug, SuiteConfig, CHECKS};

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// Sphere dimensions to verify (default: 1 and 2).
    #[arg(long, value_delimiter = ',')]
    pub dim: Vec<usize>,
    /// Number of corpus bodies per dimension (entry 0 is the unit ball).
    #[arg(long, default_value_t = CORPUS_SIZE)]
    pub corpus_size: usize,
    /// Run only these checks (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Base seed for Monte Carlo and random directions.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Monte Carlo samples per estimate.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    /// Negative control: run with a deliberate defect.
    #[arg(long, value_enum)]
    pub inject_bug: Option<Bug>,
    /// List the check names and exit.
    #[arg(long)]
    pub list: bool,
    /// Report path (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<Outcome> {
    if args.list {
        CHECKS.iter().for_each(|c| println!("{c}"));
        return Ok(Outcome { code: EXIT_OK, manifest: RunManifest::new("verify", &args)? });
    }
    let only: Vec<&str> = args.only.iter().map(String::as_str).collect();
    if let Some(bad) = only.iter().find(|n| !CHECKS.contains(n)) {
        return Err(invalid(format!("unknown check {bad:?}; known: {}", CHECKS.join(", "))));
    }
    let dims = if args.dim.is_empty() { vec![1, 2] } else { args.dim.clone() };
    if let Some(d) = dims.iter().find(|d| !matches!(d, 1 | 2)) {
        return Err(invalid(format!("unsupported dimension {d}")));
    }
    if args.corpus_size == 0 || args.corpus_size > CORPUS_SIZE {
        return Err(invalid(format!("--corpus-size must be in 1..={CORPUS_SIZE}")));
    }
    if args.samples < MIN_SAMPLES {
        return Err(invalid(format!("--samples must be at least {MIN_SAMPLES}")));
    }
    let config = SuiteConfig {
        dims,
        corpus_size: args.corpus_size,
        seed: args.seed,
        samples: args.samples,
        bug: args.inject_bug,
    };
    let report = run_suite(&config, &only, |r| {
        let status = if r.pass { "PASS" } else { "FAIL" };
        eprintln!("n={} {:<24} {status}  {}", r.dim, r.name, r.detail);
    })?;
    eprintln!("verify: {} passed, {} failed", report.passed, report.failed);
    emit_json(&report, args.output.as_deref())?;

    let mut manifest = RunManifest::new("verify", &config)?;
    manifest.seeds = (1..args.corpus_size as u64).map(|i| CORPUS_SEED_BASE + i).collect();
    manifest.seeds.push(args.seed);
    manifest.outputs.extend(args.output.clone());
    Ok(Outcome { code: if report.all_pass() { EXIT_OK } else { EXIT_SUITE }, manifest })
}
