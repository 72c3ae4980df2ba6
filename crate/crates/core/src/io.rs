//! Matrix families on disk: a JSON manifest describing the grid and listing
//! one matrix file per node in row-major order.
//!
//! ```json
//! {"lower": [-1.0], "upper": [1.0], "counts": [3],
//!  "nodes": ["node_00000.json", "node_00001.json", "node_00002.json"]}
//! ```
//!
//! Node paths are relative to the manifest's directory. Each node file holds
//! one matrix as `{"rows": r, "cols": c, "re": [...], "im": [...]}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::report::write_atomic;
use crate::sobolev::{AxisKind, Grid, SampledFamily};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
    pub nodes: Vec<String>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Reads the manifest at `path` and every node file it lists. A node that
/// cannot be read or parsed is reported with its index.
pub fn load_family(path: &Path) -> Result<SampledFamily<ComplexMatrix>> {
    let manifest: Manifest = read_json(path)?;
    let grid = Grid::new(manifest.lower, manifest.upper, manifest.counts)?;
    if manifest.nodes.len() != grid.len() {
        return Err(Error::InvalidGrid(format!(
            "manifest lists {} node files for a grid of {} nodes",
            manifest.nodes.len(),
            grid.len()
        )));
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let samples = manifest
        .nodes
        .iter()
        .enumerate()
        .map(|(node, name)| read_json::<ComplexMatrix>(&base.join(name)).map_err(|e| Error::at_node(node, e)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(node) = samples.iter().position(|m| m.rows() != samples[0].rows() || m.cols() != samples[0].cols()) {
        return Err(Error::at_node(
            node,
            Error::ShapeMismatch(format!(
                "{}x{} differs from the {}x{} of node 0",
                samples[node].rows(),
                samples[node].cols(),
                samples[0].rows(),
                samples[0].cols()
            )),
        ));
    }
    SampledFamily::new(grid, samples)
}

fn node_name(k: usize) -> String {
    format!("node_{k:05}.json")
}

/// Writes `family` as `dir/manifest.json` plus one file per node and
/// returns the manifest path.
pub fn export_family(family: &SampledFamily<ComplexMatrix>, dir: &Path) -> Result<PathBuf> {
    let grid = family.grid();
    if grid.kinds().iter().any(|&k| k != AxisKind::Nodes) {
        return Err(Error::InvalidGrid("only node grids can be exported".into()));
    }
    fs::create_dir_all(dir)?;
    let nodes: Vec<String> = (0..family.len()).map(node_name).collect();
    for (name, m) in nodes.iter().zip(family.samples()) {
        write_atomic(&dir.join(name), serde_json::to_string(m)?.as_bytes())?;
    }
    let manifest =
        Manifest { lower: grid.lower().to_vec(), upper: grid.upper().to_vec(), counts: grid.counts().to_vec(), nodes };
    let path = dir.join(MANIFEST_NAME);
    write_atomic(&path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(path)
}
