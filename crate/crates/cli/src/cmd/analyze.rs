use std::path::PathBuf;

use anyhow::Result;
use gcf_core::entropy::{entropy_report, EntropyReport};
use gcf_core::shapes::aliasing_warning;
use gcf_core::soliton::{j1_value, soliton_residual};
use gcf_core::Resolution;
use serde::Serialize;

use super::{emit_json, load_body, Outcome};
use crate::failure::{EXIT_OK, EXIT_SUITE};
use crate::manifest::RunManifest;

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// Input snapshot.
    pub snapshot: PathBuf,
    /// Output report path (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Analysis {
    dim: usize,
    resolution: Resolution,
    min_support: f64,
    max_support: f64,
    min_eig_a: f64,
    soliton_residual: f64,
    j1: f64,
    aliasing_warning: Option<String>,
    all_pass: bool,
    report: EntropyReport,
}

pub fn run(args: Args) -> Result<Outcome> {
    let (snap, body) = load_body(&args.snapshot)?;
    let report = entropy_report(&body)?;
    let all_pass = report.all_pass();
    let analysis = Analysis {
        dim: snap.dim,
        resolution: snap.resolution,
        min_support: body.min_support(),
        max_support: body.max_support(),
        min_eig_a: body.curvature().min_eig_a,
        soliton_residual: soliton_residual(&body),
        j1: j1_value(&body),
        aliasing_warning: aliasing_warning(&body),
        all_pass,
        report,
    };
    emit_json(&analysis, args.output.as_deref())?;
    for c in analysis.report.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} ({} < {})", c.name, c.lhs, c.rhs);
    }
    let mut manifest = RunManifest::new("analyze", &args)?;
    manifest.outputs.extend(args.output.clone());
    Ok(Outcome { code: if all_pass { EXIT_OK } else { EXIT_SUITE }, manifest })
}
