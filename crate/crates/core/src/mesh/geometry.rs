use thiserror::Error;

use super::{EdgeId, FaceId, Mesh, Vec3, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("face {0} is degenerate")]
    DegenerateFace(FaceId),
    #[error("edge {0} is on the boundary")]
    BoundaryEdge(EdgeId),
    #[error("vertex {0} has no incident face")]
    IsolatedVertex(VertexId),
}

/// Triangle given by three corner positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub a: Vec3,
    pub b: Vec3,
    pub c: Vec3,
}

/// Derived per-face quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometry {
    pub barycenter: Vec3,
    pub circumcenter: Vec3,
    pub circumradius: f64,
    pub area: f64,
    pub normal: Vec3,
    /// `4√3·A / (l₁² + l₂² + l₃²)`, 1 for equilateral triangles.
    pub quality: f64,
}

impl Triangle {
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Self { a, b, c }
    }

    /// Unnormalized normal `(b − a) × (c − a)`, twice the area in length.
    #[inline]
    pub fn area_vector(&self) -> Vec3 {
        (self.b - self.a).cross(&(self.c - self.a))
    }

    #[inline]
    pub fn area(&self) -> f64 {
        0.5 * self.area_vector().norm()
    }

    pub fn unit_normal(&self) -> Option<Vec3> {
        let n = self.area_vector();
        let len = n.norm();
        (len > 0.0).then(|| n / len)
    }

    pub fn barycenter(&self) -> Vec3 {
        (self.a + self.b + self.c) / 3.0
    }

    pub fn squared_edge_sum(&self) -> f64 {
        (self.b - self.a).norm_squared()
            + (self.c - self.b).norm_squared()
            + (self.a - self.c).norm_squared()
    }

    /// Circumcenter in the triangle's plane. `None` for collinear corners.
    pub fn circumcenter(&self) -> Option<Vec3> {
        let u = self.b - self.a;
        let v = self.c - self.a;
        let w = u.cross(&v);
        let w2 = w.norm_squared();
        if w2 == 0.0 {
            return None;
        }
        Some(self.a + (u.norm_squared() * v.cross(&w) + v.norm_squared() * w.cross(&u)) / (2.0 * w2))
    }

    /// Scale-invariant shape quality in [0, 1].
    pub fn quality(&self) -> f64 {
        let s = self.squared_edge_sum();
        if s == 0.0 {
            return 0.0;
        }
        (4.0 * 3f64.sqrt() * self.area() / s).clamp(0.0, 1.0)
    }

    pub fn bbox(&self) -> (Vec3, Vec3) {
        (
            self.a.inf(&self.b).inf(&self.c),
            self.a.sup(&self.b).sup(&self.c),
        )
    }

    pub fn max_edge_length(&self) -> f64 {
        (self.b - self.a)
            .norm()
            .max((self.c - self.b).norm())
            .max((self.a - self.c).norm())
    }

    /// Full geometry, or `None` when the area is at most `eps_area`.
    pub fn geometry(&self, eps_area: f64) -> Option<FaceGeometry> {
        let area = self.area();
        if area <= eps_area || !area.is_finite() {
            return None;
        }
        let circumcenter = self.circumcenter()?;
        Some(FaceGeometry {
            barycenter: self.barycenter(),
            circumradius: (circumcenter - self.a).norm(),
            circumcenter,
            area,
            normal: self.area_vector() / (2.0 * area),
            quality: self.quality(),
        })
    }
}

/// Signed dihedral angle of the hinge `a → b` with wings `c` (left face
/// `a, b, c`) and `d` (right face `b, a, d`). Zero when flat; positive when
/// the wings fold toward the face normals.
pub fn hinge_angle(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    let e = b - a;
    let n1 = e.cross(&(c - a));
    let n2 = (a - b).cross(&(d - b));
    let len = e.norm();
    if len == 0.0 {
        return 0.0;
    }
    let sin = n2.cross(&n1).dot(&e) / len;
    let cos = n1.dot(&n2);
    sin.atan2(cos)
}

impl Mesh {
    pub fn face_geometry(&self, f: FaceId, eps_area: f64) -> Result<FaceGeometry, GeometryError> {
        self.triangle(f)
            .geometry(eps_area)
            .ok_or(GeometryError::DegenerateFace(f))
    }

    /// The four vertices `(a, b, c, d)` of an interior edge's hinge.
    pub fn hinge(&self, e: EdgeId) -> Result<[VertexId; 4], GeometryError> {
        let h = e.halfedge();
        if self.face_of(h).is_none() || self.face_of(h.twin()).is_none() {
            return Err(GeometryError::BoundaryEdge(e));
        }
        let a = self.from_vertex(h);
        let b = self.to_vertex(h);
        let c = self.to_vertex(self.next(h));
        let d = self.to_vertex(self.next(h.twin()));
        Ok([a, b, c, d])
    }

    pub fn dihedral_angle(&self, e: EdgeId) -> Result<f64, GeometryError> {
        let [a, b, c, d] = self.hinge(e)?;
        Ok(hinge_angle(
            self.position(a),
            self.position(b),
            self.position(c),
            self.position(d),
        ))
    }

    /// Area-weighted vertex normal.
    pub fn vertex_normal(&self, v: VertexId) -> Result<Vec3, GeometryError> {
        let mut n = Vec3::zeros();
        let mut any = false;
        for f in self.vertex_faces(v) {
            n += self.triangle(f).area_vector();
            any = true;
        }
        if !any {
            return Err(GeometryError::IsolatedVertex(v));
        }
        let len = n.norm();
        if len == 0.0 {
            return Ok(Vec3::zeros());
        }
        Ok(n / len)
    }

    /// Area-weighted normals for every vertex slot, zero for dead slots.
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        let mut normals = vec![Vec3::zeros(); self.vertex_capacity()];
        for f in self.faces() {
            let n = self.triangle(f).area_vector();
            for v in self.face_vertices(f) {
                normals[v.idx()] += n;
            }
        }
        for n in &mut normals {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        normals
    }
}
