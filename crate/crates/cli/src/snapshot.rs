//! Snapshot files: a support function on a grid, as JSON.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use gcf_core::shapes::ShapeSpec;
use gcf_core::{build_grid, ConvexBody, Resolution};
use serde::{Deserialize, Serialize};

use crate::failure::invalid;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metadata {
    /// How the body was produced, e.g. `shape`, `flow`, `soliton`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ShapeSpec>,
    /// Flow time of the support function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema_version: u32,
    pub dim: usize,
    pub resolution: Resolution,
    /// Support values in grid node order.
    pub support: Vec<f64>,
    #[serde(default)]
    pub metadata: Metadata,
}

impl Snapshot {
    pub fn from_body(body: &ConvexBody, metadata: Metadata) -> Snapshot {
        Snapshot {
            schema_version: SCHEMA_VERSION,
            dim: body.dim(),
            resolution: body.grid().resolution(),
            support: body.support().to_vec(),
            metadata,
        }
    }

    /// Schema and shape checks that do not need a grid.
    pub fn check(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported snapshot schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.resolution.dim() != self.dim {
            return Err(invalid(format!("dim {} does not match resolution {:?}", self.dim, self.resolution)));
        }
        if self.support.len() != self.resolution.node_count() {
            return Err(invalid(format!(
                "{} support values for a grid of {} nodes",
                self.support.len(),
                self.resolution.node_count()
            )));
        }
        Ok(())
    }

    pub fn to_body(&self) -> Result<ConvexBody> {
        self.check()?;
        let grid = build_grid(self.dim, self.resolution)?;
        Ok(ConvexBody::new(grid, self.support.clone())?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Snapshot> {
        let s: Snapshot = serde_json::from_str(text)?;
        s.check()?;
        Ok(s)
    }

    pub fn read(path: &Path) -> Result<Snapshot> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Snapshot::from_json(&text).with_context(|| format!("parsing snapshot {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
