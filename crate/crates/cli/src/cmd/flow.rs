use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use gcf_core::body::{normalize_volume, omega, volume};
use gcf_core::flow::{
    harnack_monitor, monitor_bounds, run as run_flow, FlowConfig, FlowMode, FlowTrace, HarnackReport, MonitorReport,
    Termination,
};
use serde::Serialize;

use super::{load_body, Outcome};
use crate::failure::{invalid, EXIT_NUMERICAL, EXIT_OK};
use crate::manifest::RunManifest;
use crate::snapshot::{Metadata, Snapshot};

pub const TRACE_FILE: &str = "trace.csv";
pub const FINAL_FILE: &str = "final.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Normalized,
    Unnormalized,
}

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// Initial snapshot.
    pub snapshot: PathBuf,
    /// Directory for the trace, final snapshot, summary and manifest.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Normalized)]
    pub mode: Mode,
    /// Final flow time.
    #[arg(long, conflicts_with = "t_end_fraction")]
    pub t_end: Option<f64>,
    /// Un-normalized mode: final time as a fraction of the extinction time `V₀/ω_n`.
    #[arg(long)]
    pub t_end_fraction: Option<f64>,
    /// Stop once `‖u det A − 1‖∞` is below this value (normalized mode).
    #[arg(long)]
    pub soliton_tol: Option<f64>,
    /// Record a trace row every this many steps.
    #[arg(long, default_value_t = 20)]
    pub stride: usize,
    /// Safety factor of the adaptive time step.
    #[arg(long, default_value_t = 0.25)]
    pub dt_safety: f64,
    /// Fixed time step instead of the adaptive one.
    #[arg(long)]
    pub fixed_dt: Option<f64>,
    /// Rescale the initial body to the volume of the unit ball first.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Serialize)]
struct Summary {
    termination: String,
    final_time: f64,
    steps: usize,
    rejected_steps: usize,
    rows: usize,
    contracting_point: Vec<f64>,
    config: FlowConfig,
    monitors: MonitorReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    harnack: Option<HarnackReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    harnack_error: Option<String>,
}

fn config_of(args: &Args, initial_volume: f64, omega_n: f64) -> Result<FlowConfig> {
    let t_end = match (args.t_end, args.t_end_fraction, args.mode) {
        (Some(t), None, _) => t,
        (None, Some(f), Mode::Unnormalized) => f * initial_volume / omega_n,
        (None, Some(_), Mode::Normalized) => return Err(invalid("--t-end-fraction applies to --mode unnormalized")),
        (None, None, _) => return Err(invalid("give --t-end or --t-end-fraction")),
        (Some(_), Some(_), _) => unreachable!("clap rejects both"),
    };
    let mut config = match args.mode {
        Mode::Normalized => FlowConfig { soliton_tol: args.soliton_tol, ..FlowConfig::normalized(t_end) },
        Mode::Unnormalized => {
            if args.soliton_tol.is_some() {
                return Err(invalid("--soliton-tol applies to --mode normalized"));
            }
            FlowConfig { record_fields: true, ..FlowConfig::unnormalized(t_end) }
        }
    };
    config.output_stride = args.stride;
    config.dt_safety = args.dt_safety;
    config.fixed_dt = args.fixed_dt;
    config.validate()?;
    Ok(config)
}

pub fn write_trace(trace: &FlowTrace, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in &trace.rows {
        w.serialize(row)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn run(args: Args) -> Result<Outcome> {
    let (_, mut body) = load_body(&args.snapshot)?;
    if args.normalize {
        body = normalize_volume(&body)?;
    }
    let config = config_of(&args, volume(&body), omega(&body))?;
    let result = run_flow(&body, &config)?;

    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let trace_path = args.out_dir.join(TRACE_FILE);
    let final_path = args.out_dir.join(FINAL_FILE);
    let summary_path = args.out_dir.join(SUMMARY_FILE);
    write_trace(&result.trace, &trace_path)?;
    let meta = Metadata { source: Some("flow".into()), spec: None, t: Some(result.final_time()) };
    Snapshot::from_body(&result.body, meta).write(&final_path)?;

    let (harnack, harnack_error) = match config.mode {
        FlowMode::Unnormalized => match harnack_monitor(&result.trace) {
            Ok(h) => (Some(h), None),
            Err(e) => (None, Some(e.to_string())),
        },
        FlowMode::Normalized => (None, None),
    };
    let (termination, code) = match &result.termination {
        Termination::TimeLimit => ("time_limit".to_string(), EXIT_OK),
        Termination::Soliton => ("soliton".to_string(), EXIT_OK),
        Termination::Stiff(e) => (format!("stiff: {e}"), EXIT_NUMERICAL),
    };
    let summary = Summary {
        termination,
        final_time: result.final_time(),
        steps: result.steps,
        rejected_steps: result.rejected_steps,
        rows: result.trace.rows.len(),
        contracting_point: result.contracting_point.clone(),
        config: config.clone(),
        monitors: monitor_bounds(&result.trace),
        harnack,
        harnack_error,
    };
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("writing {}", summary_path.display()))?;
    eprintln!(
        "{}: t = {:.6}, {} steps, {} rows",
        summary.termination, summary.final_time, summary.steps, summary.rows
    );
    if code == EXIT_NUMERICAL {
        eprintln!("error: flow became stiff; the last accepted body is in {}", final_path.display());
    }

    let mut manifest = RunManifest::new("flow", &config)?;
    manifest.outputs = vec![trace_path, final_path, summary_path];
    manifest.write(&args.out_dir.join(MANIFEST_FILE))?;
    manifest.outputs.push(args.out_dir.join(MANIFEST_FILE));
    Ok(Outcome { code, manifest })
}
