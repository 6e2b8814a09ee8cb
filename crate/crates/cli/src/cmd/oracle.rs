use std::path::PathBuf;

use anyhow::Result;
use gcf_core::body::translate;
use gcf_core::montecarlo::{mass_center_quadrature, mc_log_integral, mc_mass_center, McEstimate};
use serde::Serialize;

use super::{emit_json, load_body, parse_list, Outcome};
use crate::failure::{invalid, EXIT_OK, EXIT_SUITE};
use crate::manifest::RunManifest;

/// Largest accepted z-score.
pub const Z_LIMIT: f64 = 3.0;
/// Differences below this (relative) are roundoff; degenerate sampling shells give `stderr = 0`.
const ROUNDOFF: f64 = 1e-10;

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// Input snapshot.
    pub snapshot: PathBuf,
    /// Reference point, comma-separated (origin when omitted).
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Report path (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Comparison {
    quadrature: f64,
    monte_carlo: McEstimate,
    z_score: f64,
    pass: bool,
}

impl Comparison {
    fn new(quadrature: f64, monte_carlo: McEstimate) -> Self {
        let z_score = monte_carlo.z_score(quadrature);
        let close = (monte_carlo.estimate - quadrature).abs() <= ROUNDOFF * (1.0 + quadrature.abs());
        Comparison { quadrature, monte_carlo, z_score, pass: z_score <= Z_LIMIT || close }
    }
}

#[derive(Debug, Serialize)]
struct OracleReport {
    z: Vec<f64>,
    samples: usize,
    seed: u64,
    /// `∫ log u_z dθ` against the signed weighted volume of the polar body.
    log_integral: Comparison,
    /// `∫ x_j / u_z dθ` against `∫_{Ω⁰_z} w/|w|^{n+1}`, per component.
    mass_center: Vec<Comparison>,
    pass: bool,
}

pub fn run(args: Args) -> Result<Outcome> {
    let (snap, body) = load_body(&args.snapshot)?;
    let z = match &args.z {
        Some(raw) => parse_list(raw)?,
        None => vec![0.0; snap.dim + 1],
    };
    if z.len() != snap.dim + 1 {
        return Err(invalid(format!("--z needs {} coordinates, got {}", snap.dim + 1, z.len())));
    }
    let uz = translate(&body, &z)?;
    let quad_log = body.grid().integrate_by(|i| uz.support()[i].ln());
    let log_integral = Comparison::new(quad_log, mc_log_integral(&body, &z, args.samples, args.seed)?);
    let mc = mc_mass_center(&body, &z, args.samples, args.seed)?;
    let mass_center: Vec<Comparison> = mass_center_quadrature(&body, &z)?
        .into_iter()
        .zip(mc.components)
        .map(|(q, m)| Comparison::new(q, m))
        .collect();
    let pass = log_integral.pass && mass_center.iter().all(|c| c.pass);
    let report = OracleReport { z, samples: args.samples, seed: args.seed, log_integral, mass_center, pass };
    emit_json(&report, args.output.as_deref())?;

    let mut manifest = RunManifest::new("oracle", &args)?;
    manifest.seeds.push(args.seed);
    manifest.outputs.extend(args.output.clone());
    Ok(Outcome { code: if pass { EXIT_OK } else { EXIT_SUITE }, manifest })
}
