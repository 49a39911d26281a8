use std::collections::HashSet;

use thiserror::Error;

use super::{EdgeId, FaceId, HalfedgeId, Mesh, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("half-edge {0} has a dead or inconsistent twin")]
    BadTwin(HalfedgeId),
    #[error("half-edge {0}: next/prev links disagree")]
    BadLinks(HalfedgeId),
    #[error("face {0} is not a 3-cycle")]
    NotTriangle(FaceId),
    #[error("face {0} repeats a vertex")]
    DegenerateFace(FaceId),
    #[error("edge {0} borders no face")]
    LooseEdge(EdgeId),
    #[error("edge {0} would border more than two faces")]
    NonManifoldEdge(EdgeId),
    #[error("vertex {0} star is not a single fan")]
    NonManifoldVertex(VertexId),
    #[error("vertex {0} is isolated")]
    IsolatedVertex(VertexId),
    #[error("vertex {0} outgoing list is inconsistent")]
    BadOutgoing(VertexId),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("duplicate face {0}")]
    DuplicateFace(FaceId),
    #[error("element counts disagree with live flags")]
    CountMismatch,
}

impl Mesh {
    /// Full structural check of every mesh invariant.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut n_edges = 0;
        for e in self.edges() {
            n_edges += 1;
            let h = e.halfedge();
            for x in [h, h.twin()] {
                let he = &self.halfedges[x.idx()];
                if !self.vertex_alive(he.to) {
                    return Err(ValidationError::BadTwin(x));
                }
                if self.next(self.prev(x)) != x || self.prev(self.next(x)) != x {
                    return Err(ValidationError::BadLinks(x));
                }
                if self.from_vertex(self.next(x)) != he.to {
                    return Err(ValidationError::BadLinks(x));
                }
                if !self.edge_alive(self.next(x).edge()) {
                    return Err(ValidationError::BadLinks(x));
                }
                if he.face.is_none() && self.face_of(self.next(x)).is_some() {
                    return Err(ValidationError::BadLinks(x));
                }
                if let Some(f) = he.face {
                    if !self.face_alive(f) {
                        return Err(ValidationError::BadLinks(x));
                    }
                }
            }
            if self.to_vertex(h) == self.to_vertex(h.twin()) {
                return Err(ValidationError::BadTwin(h));
            }
            if self.face_of(h).is_none() && self.face_of(h.twin()).is_none() {
                return Err(ValidationError::LooseEdge(e));
            }
        }

        let mut n_faces = 0;
        let mut face_keys = HashSet::new();
        for f in self.faces() {
            n_faces += 1;
            let h0 = self.face_halfedge(f);
            if !self.edge_alive(h0.edge()) {
                return Err(ValidationError::NotTriangle(f));
            }
            let h1 = self.next(h0);
            let h2 = self.next(h1);
            if self.next(h2) != h0 || h0 == h1 || h1 == h2 {
                return Err(ValidationError::NotTriangle(f));
            }
            for h in [h0, h1, h2] {
                if self.face_of(h) != Some(f) {
                    return Err(ValidationError::NotTriangle(f));
                }
            }
            let [a, b, c] = self.face_vertices(f);
            if a == b || b == c || a == c {
                return Err(ValidationError::DegenerateFace(f));
            }
            let mut key = [a, b, c];
            key.sort_unstable();
            if !face_keys.insert(key) {
                return Err(ValidationError::DuplicateFace(f));
            }
        }

        let mut n_vertices = 0;
        let mut n_out = 0;
        for (i, alive) in self.vertex_alive.iter().enumerate() {
            let v = VertexId(i as u32);
            let out = &self.outgoing[i];
            if !alive {
                if !out.is_empty() {
                    return Err(ValidationError::BadOutgoing(v));
                }
                continue;
            }
            n_vertices += 1;
            n_out += out.len();
            if out.is_empty() {
                return Err(ValidationError::IsolatedVertex(v));
            }
            let mut targets = HashSet::with_capacity(out.len());
            for &h in out {
                if !self.edge_alive(h.edge()) || self.from_vertex(h) != v {
                    return Err(ValidationError::BadOutgoing(v));
                }
                if !targets.insert(self.to_vertex(h)) {
                    return Err(ValidationError::DuplicateEdge(v, self.to_vertex(h)));
                }
            }
            self.check_single_fan(v)?;
        }

        if n_vertices != self.live_vertices
            || n_edges != self.live_edges
            || n_faces != self.live_faces
            || n_out != 2 * n_edges
        {
            return Err(ValidationError::CountMismatch);
        }
        Ok(())
    }

    fn check_single_fan(&self, v: VertexId) -> Result<(), ValidationError> {
        let out = &self.outgoing[v.idx()];
        let n_boundary = out.iter().filter(|&&h| self.face_of(h).is_none()).count();
        let start = if n_boundary == 0 {
            out[0]
        } else if n_boundary == 1 {
            // First spoke of the fan: twin of the incoming boundary half-edge.
            match out.iter().find(|&&h| self.face_of(h.twin()).is_none()) {
                Some(&h) => h,
                None => return Err(ValidationError::NonManifoldVertex(v)),
            }
        } else {
            return Err(ValidationError::NonManifoldVertex(v));
        };
        let mut visited = 1;
        let mut h = start;
        while self.face_of(h).is_some() {
            h = self.prev(h).twin();
            if h == start {
                break;
            }
            visited += 1;
            if visited > out.len() {
                return Err(ValidationError::NonManifoldVertex(v));
            }
        }
        if visited != out.len() {
            return Err(ValidationError::NonManifoldVertex(v));
        }
        Ok(())
    }
}
