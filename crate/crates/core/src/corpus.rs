//! The seeded reference corpus used by the verification suite.
//!
//! Entry 0 is the unit ball. Entries `1..CORPUS_SIZE` are
//! [`ShapeSpec::RandomValid`] bodies with seed `CORPUS_SEED_BASE + i`,
//! translated to their Santaló point and rescaled to the volume of the unit
//! ball.

use std::sync::Arc;

use serde::Serialize;

use crate::body::{normalize_volume, translate, ConvexBody};
use crate::entropy::santalo_point;
use crate::error::Result;
use crate::shapes::{make_shape, ShapeSpec};
use crate::sphere::{build_grid, Resolution, SphereGrid};

pub const CORPUS_SIZE: usize = 20;
pub const CORPUS_SEED_BASE: u64 = 20_240;
pub const CORPUS_MAGNITUDE: f64 = 0.25;
pub const CORPUS_MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct CorpusEntry {
    pub index: usize,
    pub spec: ShapeSpec,
    #[serde(skip)]
    pub body: ConvexBody,
}

/// Shape spec of corpus entry `index`.
pub fn corpus_spec(index: usize) -> ShapeSpec {
    if index == 0 {
        ShapeSpec::Ball { radius: 1.0, center: vec![] }
    } else {
        ShapeSpec::RandomValid {
            seed: CORPUS_SEED_BASE + index as u64,
            magnitude: CORPUS_MAGNITUDE,
            max_degree: CORPUS_MAX_DEGREE,
        }
    }
}

/// Santaló-centered, volume-normalized body for `spec`.
pub fn centered_normalized(grid: Arc<SphereGrid>, spec: &ShapeSpec) -> Result<ConvexBody> {
    let body = make_shape(grid, spec)?;
    let z = santalo_point(&body)?.z;
    normalize_volume(&translate(&body, &z)?)
}

pub fn corpus_entry(grid: Arc<SphereGrid>, index: usize) -> Result<CorpusEntry> {
    let spec = corpus_spec(index);
    let body = if index == 0 { ConvexBody::unit_ball(grid) } else { centered_normalized(grid, &spec)? };
    Ok(CorpusEntry { index, spec, body })
}

/// The full corpus on the standard grid of dimension `dim`.
pub fn corpus(dim: usize) -> Result<Vec<CorpusEntry>> {
    let grid = build_grid(dim, Resolution::standard(dim)?)?;
    (0..CORPUS_SIZE).map(|i| corpus_entry(grid.clone(), i)).collect()
}
