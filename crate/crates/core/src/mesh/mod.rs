//! Half-edge triangle mesh with boundary.
//!
//! Edges are stored as half-edge pairs: edge `e` owns half-edges `2e` and
//! `2e + 1`, so `twin(h) = h ^ 1`. Every vertex keeps the list of its
//! outgoing half-edges; boundary half-edges carry no face and are linked
//! into boundary loops through `next`/`prev`.
//!
//! Deleted elements are tombstoned and their handles are never reused, so
//! iteration in handle order is reproducible for a given operation sequence.
//! [`Mesh::compacted`] produces a fresh mesh with dense handles.

mod build;
mod edit;
mod geometry;
mod validate;

use std::fmt;

pub use build::BuildError;
pub use edit::{EditError, FlipRefusal};
pub use geometry::{hinge_angle, FaceGeometry, GeometryError, Triangle};
pub use validate::ValidationError;

/// 3-vector used for positions and forces.
pub type Vec3 = nalgebra::Vector3<f64>;

macro_rules! handle {
    ($name:ident, $tag:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn idx(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($tag, "{}"), self.0)
            }
        }
    };
}

handle!(VertexId, "v");
handle!(EdgeId, "e");
handle!(FaceId, "f");
handle!(HalfedgeId, "h");

impl HalfedgeId {
    #[inline]
    pub fn twin(self) -> HalfedgeId {
        HalfedgeId(self.0 ^ 1)
    }

    #[inline]
    pub fn edge(self) -> EdgeId {
        EdgeId(self.0 >> 1)
    }
}

impl EdgeId {
    /// The half-edge of this edge with the even index.
    #[inline]
    pub fn halfedge(self) -> HalfedgeId {
        HalfedgeId(self.0 << 1)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct HalfEdge {
    /// Vertex this half-edge points to.
    pub(crate) to: VertexId,
    pub(crate) next: HalfedgeId,
    pub(crate) prev: HalfedgeId,
    pub(crate) face: Option<FaceId>,
}

const NO_HALFEDGE: HalfedgeId = HalfedgeId(u32::MAX);

#[derive(Debug, Clone, Default)]
pub struct Mesh {
    positions: Vec<Vec3>,
    vertex_alive: Vec<bool>,
    outgoing: Vec<Vec<HalfedgeId>>,
    halfedges: Vec<HalfEdge>,
    edge_alive: Vec<bool>,
    face_halfedge: Vec<HalfedgeId>,
    face_alive: Vec<bool>,
    live_vertices: usize,
    live_edges: usize,
    live_faces: usize,
}

/// Per-element boundary flags indexed by handle slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryFlags {
    pub vertices: Vec<bool>,
    pub edges: Vec<bool>,
    pub faces: Vec<bool>,
}

impl Mesh {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex_count(&self) -> usize {
        self.live_vertices
    }

    pub fn edge_count(&self) -> usize {
        self.live_edges
    }

    pub fn face_count(&self) -> usize {
        self.live_faces
    }

    /// Number of vertex slots, live or dead. Per-vertex arrays are sized to this.
    pub fn vertex_capacity(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_capacity(&self) -> usize {
        self.edge_alive.len()
    }

    pub fn face_capacity(&self) -> usize {
        self.face_alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live_faces == 0
    }

    pub fn vertex_alive(&self, v: VertexId) -> bool {
        self.vertex_alive.get(v.idx()).copied().unwrap_or(false)
    }

    pub fn edge_alive(&self, e: EdgeId) -> bool {
        self.edge_alive.get(e.idx()).copied().unwrap_or(false)
    }

    pub fn face_alive(&self, f: FaceId) -> bool {
        self.face_alive.get(f.idx()).copied().unwrap_or(false)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertex_alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| VertexId(i as u32))
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edge_alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| EdgeId(i as u32))
    }

    pub fn faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        self.face_alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| FaceId(i as u32))
    }

    #[inline]
    pub fn position(&self, v: VertexId) -> Vec3 {
        self.positions[v.idx()]
    }

    #[inline]
    pub fn set_position(&mut self, v: VertexId, p: Vec3) {
        self.positions[v.idx()] = p;
    }

    /// Raw position buffer indexed by vertex slot; dead slots hold stale data.
    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn positions_mut(&mut self) -> &mut [Vec3] {
        &mut self.positions
    }

    #[inline]
    pub fn to_vertex(&self, h: HalfedgeId) -> VertexId {
        self.halfedges[h.idx()].to
    }

    #[inline]
    pub fn from_vertex(&self, h: HalfedgeId) -> VertexId {
        self.halfedges[h.twin().idx()].to
    }

    #[inline]
    pub fn next(&self, h: HalfedgeId) -> HalfedgeId {
        self.halfedges[h.idx()].next
    }

    #[inline]
    pub fn prev(&self, h: HalfedgeId) -> HalfedgeId {
        self.halfedges[h.idx()].prev
    }

    #[inline]
    pub fn face_of(&self, h: HalfedgeId) -> Option<FaceId> {
        self.halfedges[h.idx()].face
    }

    #[inline]
    pub fn face_halfedge(&self, f: FaceId) -> HalfedgeId {
        self.face_halfedge[f.idx()]
    }

    /// Outgoing half-edges of `v` in insertion order.
    pub fn outgoing(&self, v: VertexId) -> &[HalfedgeId] {
        &self.outgoing[v.idx()]
    }

    pub fn edge_vertices(&self, e: EdgeId) -> (VertexId, VertexId) {
        let h = e.halfedge();
        (self.from_vertex(h), self.to_vertex(h))
    }

    pub fn edge_length(&self, e: EdgeId) -> f64 {
        let (a, b) = self.edge_vertices(e);
        (self.position(b) - self.position(a)).norm()
    }

    pub fn is_boundary_halfedge(&self, h: HalfedgeId) -> bool {
        self.face_of(h).is_none()
    }

    pub fn is_boundary_edge(&self, e: EdgeId) -> bool {
        let h = e.halfedge();
        self.face_of(h).is_none() || self.face_of(h.twin()).is_none()
    }

    pub fn is_boundary_vertex(&self, v: VertexId) -> bool {
        self.outgoing[v.idx()]
            .iter()
            .any(|&h| self.face_of(h).is_none())
    }

    pub fn valence(&self, v: VertexId) -> usize {
        self.outgoing[v.idx()].len()
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.outgoing[v.idx()].iter().map(move |&h| self.to_vertex(h))
    }

    /// Faces incident to `v`, in outgoing-list order.
    pub fn vertex_faces(&self, v: VertexId) -> impl Iterator<Item = FaceId> + '_ {
        self.outgoing[v.idx()]
            .iter()
            .filter_map(move |&h| self.face_of(h))
    }

    /// Half-edge from `a` to `b`, if the edge exists.
    pub fn find_halfedge(&self, a: VertexId, b: VertexId) -> Option<HalfedgeId> {
        self.outgoing[a.idx()]
            .iter()
            .copied()
            .find(|&h| self.to_vertex(h) == b)
    }

    pub fn are_adjacent(&self, a: VertexId, b: VertexId) -> bool {
        self.find_halfedge(a, b).is_some()
    }

    /// Face vertices in winding order, starting at the origin of the face's half-edge.
    pub fn face_vertices(&self, f: FaceId) -> [VertexId; 3] {
        let h0 = self.face_halfedge(f);
        let h1 = self.next(h0);
        let h2 = self.next(h1);
        [self.to_vertex(h2), self.to_vertex(h0), self.to_vertex(h1)]
    }

    pub fn triangle(&self, f: FaceId) -> Triangle {
        let [a, b, c] = self.face_vertices(f);
        Triangle::new(self.position(a), self.position(b), self.position(c))
    }

    /// Outgoing boundary half-edge of `v`, if `v` is on the boundary.
    pub fn boundary_outgoing(&self, v: VertexId) -> Option<HalfedgeId> {
        self.outgoing[v.idx()]
            .iter()
            .copied()
            .find(|&h| self.face_of(h).is_none())
    }

    /// Live face triangles as vertex-slot triples, in face handle order.
    pub fn triangles(&self) -> Vec<[VertexId; 3]> {
        self.faces().map(|f| self.face_vertices(f)).collect()
    }

    pub fn boundary_classification(&self) -> BoundaryFlags {
        let mut vertices = vec![false; self.vertex_capacity()];
        let mut edges = vec![false; self.edge_capacity()];
        let mut faces = vec![false; self.face_capacity()];
        for e in self.edges() {
            if self.is_boundary_edge(e) {
                edges[e.idx()] = true;
                let (a, b) = self.edge_vertices(e);
                vertices[a.idx()] = true;
                vertices[b.idx()] = true;
            }
        }
        for f in self.faces() {
            faces[f.idx()] = self.face_vertices(f).iter().any(|v| vertices[v.idx()]);
        }
        BoundaryFlags {
            vertices,
            edges,
            faces,
        }
    }

    /// Boundary loops as vertex cycles, each following the boundary half-edges.
    /// Loops are ordered by their smallest half-edge handle.
    pub fn boundary_loops(&self) -> Vec<Vec<VertexId>> {
        let mut seen = vec![false; self.halfedges.len()];
        let mut loops = Vec::new();
        for e in self.edges() {
            for h in [e.halfedge(), e.halfedge().twin()] {
                if self.face_of(h).is_some() || seen[h.idx()] {
                    continue;
                }
                let mut cycle = Vec::new();
                let mut cur = h;
                while !seen[cur.idx()] {
                    seen[cur.idx()] = true;
                    cycle.push(self.from_vertex(cur));
                    cur = self.next(cur);
                }
                loops.push(cycle);
            }
        }
        loops
    }

    /// Mean length over live edges; zero for an empty mesh.
    pub fn mean_edge_length(&self) -> f64 {
        if self.live_edges == 0 {
            return 0.0;
        }
        self.edges().map(|e| self.edge_length(e)).sum::<f64>() / self.live_edges as f64
    }

    /// Copy with dense handles. Relative order of surviving elements is kept.
    pub fn compacted(&self) -> Mesh {
        let mut remap = vec![u32::MAX; self.vertex_capacity()];
        let mut positions = Vec::with_capacity(self.live_vertices);
        for v in self.vertices() {
            remap[v.idx()] = positions.len() as u32;
            positions.push(self.position(v));
        }
        let tris: Vec<[usize; 3]> = self
            .faces()
            .map(|f| self.face_vertices(f).map(|v| remap[v.idx()] as usize))
            .collect();
        Mesh::from_triangles(&positions, &tris).expect("compaction of a valid mesh")
    }

    fn push_vertex(&mut self, p: Vec3) -> VertexId {
        let v = VertexId(self.positions.len() as u32);
        self.positions.push(p);
        self.vertex_alive.push(true);
        self.outgoing.push(Vec::new());
        self.live_vertices += 1;
        v
    }

    fn kill_vertex(&mut self, v: VertexId) {
        debug_assert!(self.outgoing[v.idx()].is_empty());
        self.vertex_alive[v.idx()] = false;
        self.live_vertices -= 1;
    }

    fn new_edge(&mut self, a: VertexId, b: VertexId) -> HalfedgeId {
        let e = EdgeId(self.edge_alive.len() as u32);
        let h = e.halfedge();
        self.halfedges.push(HalfEdge {
            to: b,
            next: NO_HALFEDGE,
            prev: NO_HALFEDGE,
            face: None,
        });
        self.halfedges.push(HalfEdge {
            to: a,
            next: NO_HALFEDGE,
            prev: NO_HALFEDGE,
            face: None,
        });
        self.edge_alive.push(true);
        self.live_edges += 1;
        self.outgoing[a.idx()].push(h);
        self.outgoing[b.idx()].push(h.twin());
        h
    }

    fn kill_edge(&mut self, e: EdgeId) {
        let h = e.halfedge();
        let a = self.from_vertex(h);
        let b = self.to_vertex(h);
        self.outgoing[a.idx()].retain(|&x| x != h);
        self.outgoing[b.idx()].retain(|&x| x != h.twin());
        self.edge_alive[e.idx()] = false;
        self.live_edges -= 1;
    }

    /// Removes `remove` faces and inserts `add` triangles, updating connectivity
    /// locally. Edges left without faces are deleted; vertices are untouched
    /// even if they become isolated. Callers check manifoldness beforehand; a
    /// violation detected here means the mesh is left inconsistent.
    fn replace_faces(
        &mut self,
        remove: &[FaceId],
        add: &[[VertexId; 3]],
    ) -> Result<Vec<FaceId>, ValidationError> {
        let mut touched: Vec<VertexId> = Vec::with_capacity(3 * (remove.len() + add.len()));
        let mut orphans: Vec<EdgeId> = Vec::with_capacity(3 * remove.len());
        for &f in remove {
            let h0 = self.face_halfedge(f);
            let hs = [h0, self.next(h0), self.next(self.next(h0))];
            for h in hs {
                self.halfedges[h.idx()].face = None;
                touched.push(self.to_vertex(h));
            }
            self.face_alive[f.idx()] = false;
            self.live_faces -= 1;
            orphans.extend(hs.iter().map(|h| h.edge()));
        }

        let mut created = Vec::with_capacity(add.len());
        for tri in add {
            let f = FaceId(self.face_alive.len() as u32);
            let mut hs = [NO_HALFEDGE; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let h = match self.find_halfedge(a, b) {
                    Some(h) if self.face_of(h).is_some() => {
                        return Err(ValidationError::NonManifoldEdge(h.edge()));
                    }
                    Some(h) => h,
                    None => self.new_edge(a, b),
                };
                self.halfedges[h.idx()].face = Some(f);
                hs[k] = h;
                touched.push(a);
            }
            for k in 0..3 {
                let h = hs[k];
                self.halfedges[h.idx()].next = hs[(k + 1) % 3];
                self.halfedges[h.idx()].prev = hs[(k + 2) % 3];
            }
            self.face_halfedge.push(hs[0]);
            self.face_alive.push(true);
            self.live_faces += 1;
            created.push(f);
        }

        // Edges of removed faces keep their handle when a new face reuses them.
        orphans.sort_unstable();
        orphans.dedup();
        for e in orphans {
            let h = e.halfedge();
            if self.edge_alive[e.idx()] && self.face_of(h).is_none() && self.face_of(h.twin()).is_none() {
                self.kill_edge(e);
            }
        }

        touched.sort_unstable();
        touched.dedup();
        for v in touched {
            self.relink_boundary_at(v)?;
        }
        Ok(created)
    }

    /// Links the incoming boundary half-edge at `v` to the outgoing one.
    fn relink_boundary_at(&mut self, v: VertexId) -> Result<(), ValidationError> {
        let mut incoming = NO_HALFEDGE;
        let mut outgoing = NO_HALFEDGE;
        let mut n_in = 0;
        let mut n_out = 0;
        for &h in &self.outgoing[v.idx()] {
            if self.halfedges[h.idx()].face.is_none() {
                outgoing = h;
                n_out += 1;
            }
            if self.halfedges[h.twin().idx()].face.is_none() {
                incoming = h.twin();
                n_in += 1;
            }
        }
        match (n_in, n_out) {
            (0, 0) => Ok(()),
            (1, 1) => {
                self.halfedges[incoming.idx()].next = outgoing;
                self.halfedges[outgoing.idx()].prev = incoming;
                Ok(())
            }
            _ => Err(ValidationError::NonManifoldVertex(v)),
        }
    }
}
