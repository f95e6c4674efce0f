use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GroupMesh, Interpolation, MeshError, SimplicialMesh};
use crate::lie::{c64, GroupElement, GroupTag, Mat};

pub const MESH_FORMAT: &str = "gerbecalc-mesh";
pub const MESH_VERSION: u32 = 1;

/// Text mesh format: a header, one row of matrix entries per vertex factor
/// (row-major, interleaved real and imaginary parts), and the simplex table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub arity: usize,
    pub group_tags: Vec<GroupTag>,
    pub matrix_sizes: Vec<usize>,
    pub vertices: Vec<Vec<Vec<f64>>>,
    pub simplices: Vec<Vec<usize>>,
    pub signs: Vec<i8>,
    #[serde(default)]
    pub interpolation: Interpolation,
}

impl MeshFile {
    pub fn from_group_mesh(m: &GroupMesh) -> MeshFile {
        let first = m.values.first();
        MeshFile {
            format: MESH_FORMAT.into(),
            version: MESH_VERSION,
            dim: m.mesh.dim,
            arity: m.arity(),
            group_tags: first.map(|v| v.iter().map(|g| g.tag()).collect()).unwrap_or_default(),
            matrix_sizes: first.map(|v| v.iter().map(|g| g.size()).collect()).unwrap_or_default(),
            vertices: m
                .values
                .iter()
                .map(|tuple| {
                    tuple
                        .iter()
                        .map(|g| {
                            let mat = g.matrix();
                            let n = g.size();
                            let mut row = Vec::with_capacity(2 * n * n);
                            for i in 0..n {
                                for j in 0..n {
                                    row.push(mat[(i, j)].re);
                                    row.push(mat[(i, j)].im);
                                }
                            }
                            row
                        })
                        .collect()
                })
                .collect(),
            simplices: m.mesh.simplices.clone(),
            signs: m.mesh.signs.clone(),
            interpolation: m.interpolation,
        }
    }

    pub fn to_group_mesh(&self) -> Result<GroupMesh, MeshError> {
        if self.format != MESH_FORMAT || self.version != MESH_VERSION {
            return Err(MeshError::Malformed(format!("unsupported format {} v{}", self.format, self.version)));
        }
        if self.group_tags.len() != self.arity || self.matrix_sizes.len() != self.arity {
            return Err(MeshError::Malformed("header arity".into()));
        }
        let mut values = Vec::with_capacity(self.vertices.len());
        for tuple in &self.vertices {
            if tuple.len() != self.arity {
                return Err(MeshError::Malformed("vertex tuple length".into()));
            }
            let mut out = Vec::with_capacity(self.arity);
            for ((row, &tag), &n) in tuple.iter().zip(&self.group_tags).zip(&self.matrix_sizes) {
                if row.len() != 2 * n * n {
                    return Err(MeshError::Malformed("matrix entry count".into()));
                }
                let mut mat = Mat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let k = 2 * (i * n + j);
                        mat[(i, j)] = c64(row[k], row[k + 1]);
                    }
                }
                let g = GroupElement::from_raw(mat, tag);
                g.validate(1e-9)?;
                out.push(g);
            }
            values.push(out);
        }
        let mesh = SimplicialMesh::new(self.dim, values.len(), self.simplices.clone(), self.signs.clone())?;
        Ok(GroupMesh::new(mesh, values)?.with_interpolation(self.interpolation))
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("mesh serializes")
    }

    pub fn from_text(s: &str) -> Result<MeshFile, MeshError> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn write_group_mesh(path: &Path, m: &GroupMesh) -> Result<(), MeshError> {
    std::fs::write(path, MeshFile::from_group_mesh(m).to_text())?;
    Ok(())
}

pub fn read_group_mesh(path: &Path) -> Result<GroupMesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    MeshFile::from_text(&text)?.to_group_mesh()
}
