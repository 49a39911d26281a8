//! Local topology edits. Every edit checks its preconditions before touching
//! the mesh, so a refused edit leaves the mesh exactly as it was.

use thiserror::Error;

use super::{EdgeId, FaceId, Mesh, Triangle, Vec3, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EditError {
    #[error("handle {0} is dead")]
    DeadHandle(String),
    #[error("position is not finite")]
    NonFinitePosition,
    #[error("collapse of {0} violates the link condition")]
    LinkConditionViolation(EdgeId),
    #[error("collapse of {0} would pinch the boundary")]
    WouldBreakBoundary(EdgeId),
    #[error("collapse of {0} would fold a face over")]
    FoldOver(EdgeId),
    #[error("vertex {0} is not an ear tip")]
    NotAnEarTip(VertexId),
    #[error("internal connectivity error: {0}")]
    Internal(#[from] super::ValidationError),
}

/// Non-fatal reasons an edge flip is refused.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum FlipRefusal {
    #[error("edge is dead")]
    DeadHandle,
    #[error("edge is on the boundary")]
    BoundaryEdge,
    #[error("the two faces do not form a strictly convex quad")]
    NonConvexQuad,
    #[error("the flipped diagonal already exists")]
    DiagonalExists,
}

impl Mesh {
    /// Splits `e` by inserting a new vertex at `position`. Incident faces are
    /// each replaced by two faces.
    pub fn split_edge(&mut self, e: EdgeId, position: Vec3) -> Result<VertexId, EditError> {
        if !self.edge_alive(e) {
            return Err(EditError::DeadHandle(e.to_string()));
        }
        if !position.iter().all(|c| c.is_finite()) {
            return Err(EditError::NonFinitePosition);
        }
        let h = e.halfedge();
        let mut remove: Vec<FaceId> = Vec::with_capacity(2);
        let mut sides = Vec::with_capacity(2);
        for x in [h, h.twin()] {
            if let Some(f) = self.face_of(x) {
                remove.push(f);
                sides.push((self.from_vertex(x), self.to_vertex(x), self.to_vertex(self.next(x))));
            }
        }
        let m = self.push_vertex(position);
        let mut add = Vec::with_capacity(4);
        for (a, b, c) in sides {
            add.push([a, m, c]);
            add.push([m, b, c]);
        }
        self.replace_faces(&remove, &add)?;
        Ok(m)
    }

    /// Replaces the diagonal of the quad formed by the two faces of `e` with
    /// the opposite diagonal. Returns the new edge.
    pub fn flip_edge(&mut self, e: EdgeId) -> Result<EdgeId, FlipRefusal> {
        let [a, b, c, d] = self.flip_check(e)?;
        let f1 = self.face_of(e.halfedge()).unwrap();
        let f2 = self.face_of(e.halfedge().twin()).unwrap();
        self.replace_faces(&[f1, f2], &[[c, a, d], [d, b, c]])
            .expect("flip preconditions guarantee a manifold result");
        Ok(self.find_halfedge(c, d).unwrap().edge())
    }

    /// Hinge vertices of `e` if it can be flipped.
    pub fn flip_check(&self, e: EdgeId) -> Result<[VertexId; 4], FlipRefusal> {
        if !self.edge_alive(e) {
            return Err(FlipRefusal::DeadHandle);
        }
        let [a, b, c, d] = self.hinge(e).map_err(|_| FlipRefusal::BoundaryEdge)?;
        if c == d || self.are_adjacent(c, d) {
            return Err(FlipRefusal::DiagonalExists);
        }
        let (pa, pb, pc, pd) = (
            self.position(a),
            self.position(b),
            self.position(c),
            self.position(d),
        );
        if !strictly_convex_quad(pa, pb, pc, pd) {
            return Err(FlipRefusal::NonConvexQuad);
        }
        Ok([a, b, c, d])
    }

    /// Merges the endpoints of `e`. The survivor sits at the edge midpoint,
    /// or at the boundary endpoint when exactly one endpoint is on the
    /// boundary. Returns the surviving vertex.
    pub fn collapse_edge(&mut self, e: EdgeId) -> Result<VertexId, EditError> {
        let plan = self.collapse_plan(e)?;
        self.positions[plan.survivor.idx()] = plan.position;
        self.replace_faces(&plan.remove, &plan.add)?;
        self.kill_vertex(plan.removed);
        Ok(plan.survivor)
    }

    fn collapse_plan(&self, e: EdgeId) -> Result<CollapsePlan, EditError> {
        if !self.edge_alive(e) {
            return Err(EditError::DeadHandle(e.to_string()));
        }
        let h = e.halfedge();
        let (a, b) = (self.from_vertex(h), self.to_vertex(h));
        let a_bd = self.is_boundary_vertex(a);
        let b_bd = self.is_boundary_vertex(b);
        let edge_bd = self.is_boundary_edge(e);
        if a_bd && b_bd && !edge_bd {
            return Err(EditError::WouldBreakBoundary(e));
        }

        let mut opposite: Vec<VertexId> = Vec::with_capacity(2);
        for x in [h, h.twin()] {
            if self.face_of(x).is_some() {
                opposite.push(self.to_vertex(self.next(x)));
            }
        }
        let mut common: Vec<VertexId> = self.neighbors(a).filter(|&x| self.are_adjacent(b, x)).collect();
        common.sort_unstable();
        opposite.sort_unstable();
        if common != opposite {
            return Err(EditError::LinkConditionViolation(e));
        }

        let (survivor, removed, position) = match (a_bd, b_bd) {
            (true, false) => (a, b, self.position(a)),
            (false, true) => (b, a, self.position(b)),
            _ => {
                let (s, r) = if a < b { (a, b) } else { (b, a) };
                (s, r, 0.5 * (self.position(a) + self.position(b)))
            }
        };

        let mut remove = Vec::new();
        let mut add = Vec::new();
        for f in self.vertex_faces(removed) {
            remove.push(f);
            let tri = self.face_vertices(f);
            if tri.contains(&survivor) {
                continue;
            }
            add.push(tri.map(|v| if v == removed { survivor } else { v }));
        }

        // A vertex whose every face is deleted would be left isolated.
        for &o in &opposite {
            if self.vertex_faces(o).all(|f| remove.contains(&f) && self.face_vertices(f).contains(&survivor)) {
                return Err(EditError::LinkConditionViolation(e));
            }
        }
        if self.face_count() + add.len() == remove.len() {
            return Err(EditError::LinkConditionViolation(e));
        }
        // Duplicate faces around the survivor.
        for tri in &add {
            let mut key = *tri;
            key.sort_unstable();
            let dup = self.vertex_faces(survivor).any(|f| {
                let mut k = self.face_vertices(f);
                k.sort_unstable();
                k == key
            });
            if dup {
                return Err(EditError::LinkConditionViolation(e));
            }
        }

        // Fold-over: every face that moves must keep its orientation.
        let moved = |v: VertexId| if v == removed || v == survivor { position } else { self.position(v) };
        let check = |old: [VertexId; 3], new: [VertexId; 3]| -> bool {
            let t_old = self.triangle_of(old);
            let t_new = Triangle::new(moved(new[0]), moved(new[1]), moved(new[2]));
            let n_old = t_old.area_vector();
            let n_new = t_new.area_vector();
            n_old.dot(&n_new) > 0.0
        };
        for f in self.vertex_faces(removed) {
            let tri = self.face_vertices(f);
            if tri.contains(&survivor) {
                continue;
            }
            let new = tri.map(|v| if v == removed { survivor } else { v });
            if !check(tri, new) {
                return Err(EditError::FoldOver(e));
            }
        }
        for f in self.vertex_faces(survivor) {
            let tri = self.face_vertices(f);
            if tri.contains(&removed) {
                continue;
            }
            if !check(tri, tri) {
                return Err(EditError::FoldOver(e));
            }
        }

        Ok(CollapsePlan {
            survivor,
            removed,
            position,
            remove,
            add,
        })
    }

    fn triangle_of(&self, tri: [VertexId; 3]) -> Triangle {
        Triangle::new(
            self.position(tri[0]),
            self.position(tri[1]),
            self.position(tri[2]),
        )
    }

    /// Removes a vertex with exactly two neighbors together with its face.
    pub fn remove_vertex(&mut self, v: VertexId) -> Result<(), EditError> {
        if !self.vertex_alive(v) {
            return Err(EditError::DeadHandle(v.to_string()));
        }
        if self.valence(v) != 2 {
            return Err(EditError::NotAnEarTip(v));
        }
        let f = match self.vertex_faces(v).next() {
            Some(f) => f,
            None => return Err(EditError::NotAnEarTip(v)),
        };
        let [x, y] = [self.to_vertex(self.outgoing(v)[0]), self.to_vertex(self.outgoing(v)[1])];
        // The opposite edge must keep a face, otherwise x and y are left dangling.
        let opp = self.find_halfedge(x, y).expect("ear has an opposite edge");
        if self.face_of(opp).is_none() || self.face_of(opp.twin()).is_none() {
            return Err(EditError::NotAnEarTip(v));
        }
        self.replace_faces(&[f], &[])?;
        self.kill_vertex(v);
        Ok(())
    }
}

struct CollapsePlan {
    survivor: VertexId,
    removed: VertexId,
    position: Vec3,
    remove: Vec<FaceId>,
    add: Vec<[VertexId; 3]>,
}

/// True when quad `a, d, b, c` (diagonal `a-b`, wings `c`, `d`) is strictly
/// convex, judged in the plane orthogonal to the mean face normal, and the
/// flipped faces keep a consistent orientation.
pub(crate) fn strictly_convex_quad(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> bool {
    let n1 = (b - a).cross(&(c - a));
    let n2 = (a - b).cross(&(d - b));
    let (l1, l2) = (n1.norm(), n2.norm());
    if l1 == 0.0 || l2 == 0.0 {
        return false;
    }
    let n = n1 / l1 + n2 / l2;
    if n.norm_squared() < 1e-12 {
        return false;
    }
    let orient = |p: Vec3, q: Vec3, r: Vec3| (q - p).cross(&(r - p)).dot(&n);
    // Diagonals a-b and c-d must properly cross.
    let ab_separates = orient(a, b, c) > 0.0 && orient(a, b, d) < 0.0;
    let cd_separates = orient(c, d, b) > 0.0 && orient(c, d, a) < 0.0;
    if !(ab_separates && cd_separates) {
        return false;
    }
    let m1 = (a - c).cross(&(d - c));
    let m2 = (b - d).cross(&(c - d));
    m1.dot(&m2) > 0.0
}
