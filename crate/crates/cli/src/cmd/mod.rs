//! Command-line definition and dispatch.

mod analyze;
mod flow;
mod oracle;
mod shape;
mod soliton;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use gcf_core::{ConvexBody, Resolution};
use serde::Serialize;

use crate::failure::invalid;
use crate::manifest::RunManifest;
use crate::snapshot::Snapshot;

#[derive(Debug, Parser)]
#[command(name = "gcf", version, about = "Gauss curvature flow of convex bodies on S¹ and S²")]
pub struct Cli {
    /// Also write a run manifest (settings, seeds, outputs) to this path.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a convex body and write it as a snapshot.
    Shape(shape::Args),
    /// Entropies, distinguished points, radii and inequality checks of a snapshot.
    Analyze(analyze::Args),
    /// Run the Gauss curvature flow and write a trace and final snapshot.
    Flow(flow::Args),
    /// Flow a body to a shrinking soliton and report the soliton diagnostics.
    Soliton(soliton::Args),
    /// Compare Monte Carlo volume identities against quadrature.
    Oracle(oracle::Args),
    /// Run the property suite over the reference corpus.
    Verify(verify::Args),
}

/// Outcome of a command that did not error.
pub struct Outcome {
    pub code: u8,
    pub manifest: RunManifest,
}

pub fn dispatch(cli: Cli) -> Result<u8> {
    let outcome = match cli.command {
        Command::Shape(a) => shape::run(a)?,
        Command::Analyze(a) => analyze::run(a)?,
        Command::Flow(a) => flow::run(a)?,
        Command::Soliton(a) => soliton::run(a)?,
        Command::Oracle(a) => oracle::run(a)?,
        Command::Verify(a) => verify::run(a)?,
    };
    if let Some(path) = cli.manifest {
        outcome.manifest.write(&path)?;
    }
    Ok(outcome.code)
}

/// Grid selection shared by commands that build bodies.
#[derive(Debug, Clone, Copy, clap::Args, Serialize)]
pub struct GridArgs {
    /// Nodes on S¹.
    #[arg(long)]
    pub n: Option<usize>,
    /// Gauss–Legendre colatitudes on S².
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Longitudes on S².
    #[arg(long)]
    pub n_phi: Option<usize>,
}

impl GridArgs {
    pub fn resolution(&self, dim: usize) -> Result<Resolution> {
        let standard = Resolution::standard(dim)?;
        match (dim, standard) {
            (1, Resolution::Circle { n }) => {
                if self.n_theta.is_some() || self.n_phi.is_some() {
                    return Err(invalid("--n-theta/--n-phi apply to --dim 2 only"));
                }
                Ok(Resolution::Circle { n: self.n.unwrap_or(n) })
            }
            (_, Resolution::Sphere { n_theta, n_phi }) => {
                if self.n.is_some() {
                    return Err(invalid("--n applies to --dim 1 only"));
                }
                Ok(Resolution::Sphere { n_theta: self.n_theta.unwrap_or(n_theta), n_phi: self.n_phi.unwrap_or(n_phi) })
            }
            _ => unreachable!("standard resolution matches its dimension"),
        }
    }
}

pub fn parse_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| invalid(format!("not a number: {s:?} in {raw:?}"))))
        .collect()
}

pub fn load_body(path: &Path) -> Result<(Snapshot, ConvexBody)> {
    let snap = Snapshot::read(path)?;
    let body = snap.to_body().with_context(|| format!("snapshot {} is not a valid body", path.display()))?;
    Ok((snap, body))
}

/// Pretty JSON to `path`, or to stdout when no path is given.
pub fn emit_json(value: &impl Serialize, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
