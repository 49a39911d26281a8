//! Quality metrics, self-intersection counting and failure detection.

mod intersect;

pub use intersect::{segment_pierces, triangles_intersect};

use std::fmt;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::mesh::{FaceId, Mesh, ValidationError, Vec3};

/// Touching tolerance of the intersection test, relative to `L0`.
pub const TOUCH_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub self_intersections: usize,
    pub mean_quality: f64,
    pub mean_valence: f64,
    /// Mean of squared interior dihedral angles, rad².
    pub mean_sq_dihedral: f64,
    /// Unnormalized sum of the same.
    pub sum_sq_dihedral: f64,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub failure: Option<FailureReason>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FailureReason {
    NonFinite,
    DegenerateLongEdge(FaceId),
    Invalid(ValidationError),
}

impl FailureReason {
    /// Short tag used in logs and CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            FailureReason::NonFinite => "non-finite",
            FailureReason::DegenerateLongEdge(_) => "degenerate-long-edge",
            FailureReason::Invalid(_) => "invalid-mesh",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::NonFinite => f.write_str("non-finite"),
            FailureReason::DegenerateLongEdge(face) => write!(f, "degenerate-long-edge ({face})"),
            FailureReason::Invalid(e) => write!(f, "invalid-mesh ({e})"),
        }
    }
}

struct FaceBox {
    face: FaceId,
    lo: Vec3,
    hi: Vec3,
}

/// Intersecting face pairs `(f, g)` with `f < g`, sorted. Pairs sharing a
/// vertex are skipped.
pub fn self_intersecting_pairs(mesh: &Mesh, rest_length: f64) -> Vec<(FaceId, FaceId)> {
    let tol = TOUCH_TOLERANCE * rest_length;
    let mut boxes: Vec<FaceBox> = mesh
        .faces()
        .map(|f| {
            let (lo, hi) = mesh.triangle(f).bbox();
            FaceBox { face: f, lo, hi }
        })
        .collect();
    boxes.sort_by(|a, b| a.lo.x.total_cmp(&b.lo.x).then(a.face.cmp(&b.face)));
    let mut pairs: Vec<(FaceId, FaceId)> = (0..boxes.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = &boxes[i];
            let va = mesh.face_vertices(a.face);
            let ta = va.map(|v| mesh.position(v));
            let mut out = Vec::new();
            for b in boxes[i + 1..].iter().take_while(|b| b.lo.x <= a.hi.x) {
                let overlap = (1..3).all(|k| b.lo[k] <= a.hi[k] && a.lo[k] <= b.hi[k]);
                if !overlap {
                    continue;
                }
                let vb = mesh.face_vertices(b.face);
                if vb.iter().any(|v| va.contains(v)) {
                    continue;
                }
                let tb = vb.map(|v| mesh.position(v));
                if triangles_intersect(&ta, &tb, tol) {
                    out.push(if a.face < b.face { (a.face, b.face) } else { (b.face, a.face) });
                }
            }
            out
        })
        .collect();
    pairs.sort_unstable();
    pairs
}

pub fn count_self_intersections(mesh: &Mesh, rest_length: f64) -> usize {
    self_intersecting_pairs(mesh, rest_length).len()
}

/// Squared dihedral angles of all interior edges, in edge handle order.
pub fn squared_dihedrals(mesh: &Mesh) -> Vec<f64> {
    mesh.edges()
        .filter_map(|e| mesh.dihedral_angle(e).ok())
        .map(|t| t * t)
        .collect()
}

pub fn detect_failure(mesh: &Mesh, rest_length: f64) -> Option<FailureReason> {
    if mesh
        .vertices()
        .any(|v| mesh.position(v).iter().any(|c| !c.is_finite()))
    {
        return Some(FailureReason::NonFinite);
    }
    let eps_area = 1e-12 * rest_length * rest_length;
    for f in mesh.faces() {
        let t = mesh.triangle(f);
        if t.area() < eps_area && t.max_edge_length() > 10.0 * rest_length {
            return Some(FailureReason::DegenerateLongEdge(f));
        }
    }
    mesh.validate().err().map(FailureReason::Invalid)
}

pub fn metrics(mesh: &Mesh, rest_length: f64) -> MetricsReport {
    let (v, e, f) = (mesh.vertex_count(), mesh.edge_count(), mesh.face_count());
    let mean = |sum: f64, n: usize| if n == 0 { 0.0 } else { sum / n as f64 };
    let quality: f64 = mesh.faces().map(|f| mesh.triangle(f).quality()).sum();
    let valence: usize = mesh.vertices().map(|v| mesh.valence(v)).sum();
    let dihedrals = squared_dihedrals(mesh);
    let sum_sq: f64 = dihedrals.iter().sum();
    let failure = detect_failure(mesh, rest_length);
    // Intersection tests need finite coordinates.
    let self_intersections = match failure {
        Some(FailureReason::NonFinite) => 0,
        _ => count_self_intersections(mesh, rest_length),
    };
    MetricsReport {
        self_intersections,
        mean_quality: mean(quality, f),
        mean_valence: mean(valence as f64, v),
        mean_sq_dihedral: mean(sum_sq, dihedrals.len()),
        sum_sq_dihedral: sum_sq,
        vertices: v,
        edges: e,
        faces: f,
        failure,
    }
}

/// SHA-256 of the live positions in handle order, little-endian `f64`
/// bits, as lowercase hex.
pub fn vertex_buffer_hash(mesh: &Mesh) -> String {
    let mut h = Sha256::new();
    for v in mesh.vertices() {
        for c in mesh.position(v).iter() {
            h.update(c.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::VertexId;

    fn grid(n: usize) -> Mesh {
        let h = 3f64.sqrt() / 2.0;
        let mut p = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                p.push(Vec3::new(i as f64 + 0.5 * j as f64, j as f64 * h, 0.0));
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut t = Vec::new();
        for j in 0..n {
            for i in 0..n {
                t.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
                t.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Mesh::from_triangles(&p, &t).unwrap()
    }

    fn octahedron() -> Mesh {
        let p = [
            Vec3::x(),
            -Vec3::x(),
            Vec3::y(),
            -Vec3::y(),
            Vec3::z(),
            -Vec3::z(),
        ];
        let t = [
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ];
        Mesh::from_triangles(&p, &t).unwrap()
    }

    #[test]
    fn flat_equilateral_grid() {
        let m = grid(6);
        let r = metrics(&m, 1.0);
        assert!((r.mean_quality - 1.0).abs() < 1e-12);
        assert_eq!(r.mean_sq_dihedral, 0.0);
        assert_eq!(r.self_intersections, 0);
        assert!(r.failure.is_none());
    }

    #[test]
    fn octahedron_valence() {
        let r = metrics(&octahedron(), 1.0);
        assert_eq!(r.mean_valence, 4.0);
        // Every hinge of the octahedron bends by the same angle.
        let theta = std::f64::consts::PI - (-1.0f64 / 3.0).acos();
        assert!((r.mean_sq_dihedral - theta * theta).abs() < 1e-12);
    }

    #[test]
    fn pierced_sheet_counts_one() {
        let mut p = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
            Vec3::new(0.5, 0.5, -1.0),
            Vec3::new(0.5, 0.5, 1.0),
            Vec3::new(3.0, 3.0, 0.5),
        ];
        let m = Mesh::from_triangles(&p, &[[0, 1, 2], [3, 4, 5]]).unwrap();
        assert_eq!(count_self_intersections(&m, 1.0), 1);
        p[5].z = 1.0;
        p[3].z = 0.1;
        let m = Mesh::from_triangles(&p, &[[0, 1, 2], [3, 4, 5]]).unwrap();
        assert_eq!(count_self_intersections(&m, 1.0), 0);
    }

    #[test]
    fn failure_signatures() {
        let mut m = grid(3);
        assert!(detect_failure(&m, 1.0).is_none());
        m.set_position(VertexId(5), Vec3::new(f64::NAN, 0.0, 0.0));
        assert_eq!(detect_failure(&m, 1.0).unwrap().tag(), "non-finite");

        let sliver = Mesh::from_triangles(
            &[Vec3::new(0.0, 0.0, 0.0), Vec3::new(20.0, 0.0, 0.0), Vec3::new(10.0, 0.0, 0.0)],
            &[[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(detect_failure(&sliver, 1.0).unwrap().tag(), "degenerate-long-edge");
    }
}
