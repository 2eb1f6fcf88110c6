//! JSON container files.
//!
//! ```json
//! { "vertices": [[x, y, z], ...], "faces": [[i, j, k, ...], ...],
//!   "holes": [ { "vertices": [...], "faces": [...] } ] }
//! ```
//!
//! Indices are 0-based and local to their shell. Normals are derived on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{build_container, PolyhedralContainer, Shell};
use crate::error::Result;
use crate::geometry::Point3;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ShellFile {
    pub vertices: Vec<Point3>,
    pub faces: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContainerFile {
    pub vertices: Vec<Point3>,
    pub faces: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holes: Vec<ShellFile>,
}

impl ContainerFile {
    pub(super) fn from_shells(vertices: &[Point3], faces: &[Vec<usize>], holes: &[Shell]) -> Self {
        Self {
            vertices: vertices.to_vec(),
            faces: faces.to_vec(),
            holes: holes
                .iter()
                .map(|h| ShellFile {
                    vertices: h.vertices.clone(),
                    faces: h.faces.clone(),
                })
                .collect(),
        }
    }

    pub fn build(&self) -> Result<PolyhedralContainer> {
        build_container(
            self.vertices.clone(),
            self.faces.clone(),
            self.holes
                .iter()
                .map(|h| Shell {
                    vertices: h.vertices.clone(),
                    faces: h.faces.clone(),
                })
                .collect(),
        )
    }
}

impl PolyhedralContainer {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ContainerFile = serde_json::from_str(s)?;
        file.build()
    }

    /// Loads a container file; the file stem becomes the container name.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let c = Self::from_json_str(&text)?;
        Ok(match path.file_stem().and_then(|s| s.to_str()) {
            Some(stem) => c.with_name(stem),
            None => c,
        })
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self.source())?)
    }
}
