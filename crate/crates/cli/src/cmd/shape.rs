use std::path::PathBuf;

use anyhow::Result;
use gcf_core::body::{normalize_volume, translate, volume};
use gcf_core::build_grid;
use gcf_core::entropy::santalo_point;
use gcf_core::shapes::{aliasing_warning, make_shape, HarmonicTerm, ShapeSpec};
use serde::Serialize;

use super::{emit_json, parse_list, GridArgs, Outcome};
use crate::failure::{invalid, EXIT_OK};
use crate::manifest::RunManifest;
use crate::snapshot::{Metadata, Snapshot};

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// Sphere dimension (1 or 2).
    #[arg(long)]
    pub dim: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Ball of this radius.
    #[arg(long, group = "kind")]
    pub ball: Option<f64>,
    /// Ball center as comma-separated coordinates.
    #[arg(long, requires = "ball")]
    pub center: Option<String>,
    /// Axis-aligned ellipsoid semiaxes, comma-separated.
    #[arg(long, group = "kind")]
    pub ellipsoid: Option<String>,
    /// Harmonic perturbation term `degree:amplitude` or `degree:order:amplitude` (repeatable).
    #[arg(long, group = "kind")]
    pub harmonic: Vec<String>,
    /// Base radius for harmonic perturbations.
    #[arg(long, default_value_t = 1.0, requires = "harmonic")]
    pub base: f64,
    /// Seeded random strictly convex body.
    #[arg(long, group = "kind")]
    pub random: Option<u64>,
    #[arg(long, default_value_t = 0.25, requires = "random")]
    pub magnitude: f64,
    #[arg(long, default_value_t = 4, requires = "random")]
    pub max_degree: usize,
    /// Translate so the Santaló point is the origin.
    #[arg(long)]
    pub santalo_center: bool,
    /// Rescale to the volume of the unit ball.
    #[arg(long)]
    pub normalize: bool,
    /// Output snapshot path (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_term(raw: &str) -> Result<HarmonicTerm> {
    let parts: Vec<&str> = raw.split(':').collect();
    let bad = || invalid(format!("harmonic term {raw:?} is not degree:amplitude or degree:order:amplitude"));
    let (degree, order, amplitude) = match parts.as_slice() {
        [l, a] => (l, "0", a),
        [l, m, a] => (l, *m, a),
        _ => return Err(bad()),
    };
    Ok(HarmonicTerm {
        degree: degree.parse().map_err(|_| bad())?,
        order: order.parse().map_err(|_| bad())?,
        amplitude: amplitude.parse().map_err(|_| bad())?,
    })
}

pub fn spec_of(args: &Args) -> Result<ShapeSpec> {
    if let Some(radius) = args.ball {
        let center = args.center.as_deref().map(parse_list).transpose()?.unwrap_or_default();
        return Ok(ShapeSpec::Ball { radius, center });
    }
    if let Some(raw) = &args.ellipsoid {
        return Ok(ShapeSpec::Ellipsoid { semiaxes: parse_list(raw)? });
    }
    if !args.harmonic.is_empty() {
        let terms = args.harmonic.iter().map(|t| parse_term(t)).collect::<Result<_>>()?;
        return Ok(ShapeSpec::HarmonicPerturbation { base: args.base, terms });
    }
    if let Some(seed) = args.random {
        return Ok(ShapeSpec::RandomValid { seed, magnitude: args.magnitude, max_degree: args.max_degree });
    }
    Err(invalid("choose one of --ball, --ellipsoid, --harmonic, --random"))
}

pub fn run(args: Args) -> Result<Outcome> {
    let spec = spec_of(&args)?;
    let grid = build_grid(args.dim, args.grid.resolution(args.dim)?)?;
    let mut body = make_shape(grid, &spec)?;
    if let Some(w) = aliasing_warning(&body) {
        eprintln!("warning: {w}");
    }
    if args.santalo_center {
        body = translate(&body, &santalo_point(&body)?.z)?;
    }
    if args.normalize {
        body = normalize_volume(&body)?;
    }
    eprintln!("volume {:.15e}, min u {:.6e}, min eig A {:.6e}", volume(&body), body.min_support(), body.curvature().min_eig_a);
    let meta = Metadata { source: Some("shape".into()), spec: Some(spec.clone()), t: None };
    emit_json(&Snapshot::from_body(&body, meta), args.output.as_deref())?;

    let mut manifest = RunManifest::new("shape", &args)?;
    if let ShapeSpec::RandomValid { seed, .. } = spec {
        manifest.seeds.push(seed);
    }
    manifest.outputs.extend(args.output.clone());
    Ok(Outcome { code: EXIT_OK, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_harmonic_terms() {
        assert_eq!(parse_term("3:0.1").unwrap(), HarmonicTerm { degree: 3, order: 0, amplitude: 0.1 });
        assert_eq!(parse_term("2:-1:0.05").unwrap(), HarmonicTerm { degree: 2, order: -1, amplitude: 0.05 });
        assert!(parse_term("3").is_err());
        assert!(parse_term("a:b").is_err());
    }
}
