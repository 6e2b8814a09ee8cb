use std::path::PathBuf;

use anyhow::Result;
use gcf_core::body::normalize_volume;
use gcf_core::flow::FlowConfig;
use gcf_core::soliton::{solve_soliton_with, SOLITON_T_END};
use serde::Serialize;

use super::{emit_json, load_body, Outcome};
use crate::failure::{EXIT_NUMERICAL, EXIT_OK};
use crate::manifest::RunManifest;
use crate::snapshot::{Metadata, Snapshot};

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// Initial snapshot; it is rescaled to the volume of the unit ball.
    pub snapshot: PathBuf,
    /// Residual tolerance for `‖u det A − 1‖∞`.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Give up at this flow time.
    #[arg(long, default_value_t = SOLITON_T_END)]
    pub t_end: f64,
    /// Write the final body here.
    #[arg(long)]
    pub final_snapshot: Option<PathBuf>,
    /// Report path (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<Outcome> {
    let (_, body) = load_body(&args.snapshot)?;
    let config = FlowConfig { soliton_tol: Some(args.tol), ..FlowConfig::normalized(args.t_end) };
    let (fin, report) = solve_soliton_with(&normalize_volume(&body)?, &config)?;
    if let Some(path) = &args.final_snapshot {
        let meta = Metadata { source: Some("soliton".into()), spec: None, t: Some(report.final_time) };
        Snapshot::from_body(&fin, meta).write(path)?;
    }
    emit_json(&report, args.output.as_deref())?;
    if !report.converged {
        eprintln!("error: no soliton within t = {} (residual {:.3e})", args.t_end, report.residual);
    }
    let mut manifest = RunManifest::new("soliton", &config)?;
    manifest.outputs.extend(args.final_snapshot.clone());
    manifest.outputs.extend(args.output.clone());
    Ok(Outcome { code: if report.converged { EXIT_OK } else { EXIT_NUMERICAL }, manifest })
}
