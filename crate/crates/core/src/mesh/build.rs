use std::collections::HashMap;

use thiserror::Error;

use super::{Mesh, Vec3, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("face {face} references vertex {index}, but only {count} vertices exist")]
    DanglingIndex {
        face: usize,
        index: usize,
        count: usize,
    },
    #[error("face {0} lists a vertex more than once")]
    DegenerateFace(usize),
    #[error("non-manifold input: {0}")]
    NonManifoldInput(String),
    #[error("inconsistent orientation: edge ({0}, {1}) traversed twice in the same direction")]
    InconsistentOrientation(usize, usize),
    #[error("vertex {0} is not referenced by any face")]
    UnreferencedVertex(usize),
    #[error("non-finite coordinate on vertex {0}")]
    NonFinitePosition(usize),
}

impl Mesh {
    /// Builds a mesh from positions and consistently oriented triangles.
    pub fn from_triangles(positions: &[Vec3], triangles: &[[usize; 3]]) -> Result<Mesh, BuildError> {
        let n = positions.len();
        for (i, p) in positions.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(BuildError::NonFinitePosition(i));
            }
        }
        let mut used = vec![false; n];
        // Undirected edge -> directed uses seen so far.
        let mut uses: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (fi, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i >= n {
                    return Err(BuildError::DanglingIndex {
                        face: fi,
                        index: i,
                        count: n,
                    });
                }
                used[i] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(BuildError::DegenerateFace(fi));
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let entry = uses.entry(key).or_insert((0, 0));
                if a < b {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
                if entry.0 + entry.1 > 2 {
                    return Err(BuildError::NonManifoldInput(format!(
                        "edge ({}, {}) borders more than two faces",
                        key.0, key.1
                    )));
                }
                if entry.0 > 1 || entry.1 > 1 {
                    return Err(BuildError::InconsistentOrientation(a, b));
                }
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(BuildError::UnreferencedVertex(i));
        }

        let mut mesh = Mesh::new();
        for p in positions {
            mesh.push_vertex(*p);
        }
        let tris: Vec<[VertexId; 3]> = triangles
            .iter()
            .map(|t| t.map(|i| VertexId(i as u32)))
            .collect();
        mesh.replace_faces(&[], &tris)
            .map_err(|e| BuildError::NonManifoldInput(e.to_string()))?;
        mesh.validate()
            .map_err(|e| BuildError::NonManifoldInput(e.to_string()))?;
        Ok(mesh)
    }
}
