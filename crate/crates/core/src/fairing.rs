//! Circumcenter fairing of interior vertices and midpoint smoothing of
//! boundary loops.
//!
//! Every update is Jacobi-style: targets are computed from a frozen copy of
//! the positions and written back afterwards, so the result does not depend
//! on traversal order.

use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{BoundaryFlags, Mesh, Triangle, Vec3, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FairingError {
    #[error("boundary vertex {0} does not have exactly two boundary neighbors")]
    MalformedBoundary(VertexId),
    #[error("vertex {0} is not alive")]
    DeadVertex(VertexId),
}

/// Weight of a face in the interior target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FaceWeight {
    /// `A(f)`: the optimal-Delaunay position update.
    #[default]
    Area,
    /// `(R(f)² + t) / A(f)`. Favors obtuse faces, whose circumcenters lie far
    /// outside the ring, and diverges under repeated application at α = 0.75.
    CircumradiusOverArea,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairingParams {
    /// Interior blend toward the weighted circumcenter target.
    pub alpha: f64,
    /// Boundary blend toward the neighbor midpoint.
    pub beta: f64,
    /// Added to `R²` in the face weight.
    pub tolerance: f64,
    /// Lower clamp on face area in the weight.
    pub eps_area: f64,
    pub weight: FaceWeight,
}

impl FairingParams {
    pub fn for_rest_length(l0: f64) -> Self {
        Self {
            alpha: 0.75,
            beta: 0.1,
            tolerance: 1e-8 * l0 * l0,
            eps_area: 1e-12 * l0 * l0,
            weight: FaceWeight::Area,
        }
    }
}

/// Point and weight a face contributes to the target of its corners.
fn face_contribution(tri: &Triangle, boundary_face: bool, params: &FairingParams) -> (Vec3, f64) {
    let area = tri.area().max(params.eps_area);
    let (point, r2) = match tri.circumcenter() {
        Some(c) => {
            let r2 = (c - tri.a).norm_squared();
            (if boundary_face { tri.barycenter() } else { c }, r2)
        }
        None => (tri.barycenter(), 0.25 * tri.max_edge_length().powi(2)),
    };
    let w = match params.weight {
        FaceWeight::Area => area,
        FaceWeight::CircumradiusOverArea => (r2 + params.tolerance) / area,
    };
    (point, w)
}

/// Weighted target of interior vertex `v` from its incident faces.
pub fn interior_target(mesh: &Mesh, flags: &BoundaryFlags, v: VertexId, params: &FairingParams) -> Vec3 {
    let mut sum = Vec3::zeros();
    let mut wsum = 0.0;
    for f in mesh.vertex_faces(v) {
        let (p, w) = face_contribution(&mesh.triangle(f), flags.faces[f.idx()], params);
        sum += w * p;
        wsum += w;
    }
    if wsum > 0.0 && wsum.is_finite() {
        sum / wsum
    } else {
        mesh.position(v)
    }
}

/// Endpoints of the two boundary edges at `v`.
pub fn boundary_neighbors(mesh: &Mesh, v: VertexId) -> Result<(VertexId, VertexId), FairingError> {
    let mut out = mesh.outgoing(v).iter().filter(|&&h| mesh.face_of(h).is_none());
    let (Some(&h), None) = (out.next(), out.next()) else {
        return Err(FairingError::MalformedBoundary(v));
    };
    let ahead = mesh.to_vertex(h);
    let behind = mesh.from_vertex(mesh.prev(h));
    if ahead == behind || mesh.to_vertex(mesh.prev(h)) != v {
        return Err(FairingError::MalformedBoundary(v));
    }
    Ok((behind, ahead))
}

/// Moves every interior vertex a fraction `alpha` toward its target.
pub fn smooth_interior(mesh: &mut Mesh, params: &FairingParams) {
    let flags = mesh.boundary_classification();
    let vs: Vec<VertexId> = mesh.vertices().filter(|v| !flags.vertices[v.idx()]).collect();
    apply_interior(mesh, &flags, &vs, params.alpha, params);
}

/// Moves every boundary vertex a fraction `beta` toward the midpoint of its
/// two boundary neighbors.
pub fn smooth_boundary(mesh: &mut Mesh, params: &FairingParams) -> Result<(), FairingError> {
    let vs: Vec<VertexId> = mesh.vertices().filter(|&v| mesh.is_boundary_vertex(v)).collect();
    apply_boundary(mesh, &vs, params.beta)
}

/// Applies the interior rule to the interior members of `vertices` and the
/// boundary rule to the boundary members, from one shared snapshot.
pub fn smooth_subset(mesh: &mut Mesh, vertices: &[VertexId], params: &FairingParams) -> Result<(), FairingError> {
    if let Some(&v) = vertices.iter().find(|&&v| !mesh.vertex_alive(v)) {
        return Err(FairingError::DeadVertex(v));
    }
    let flags = mesh.boundary_classification();
    let (boundary, interior): (Vec<VertexId>, Vec<VertexId>) =
        vertices.iter().partition(|v| flags.vertices[v.idx()]);
    let interior_moves = interior_targets(mesh, &flags, &interior, params.alpha, params);
    let boundary_moves = boundary_targets(mesh, &boundary, params.beta)?;
    for (v, p) in interior_moves.into_iter().chain(boundary_moves) {
        mesh.set_position(v, p);
    }
    Ok(())
}

fn interior_targets(
    mesh: &Mesh,
    flags: &BoundaryFlags,
    vs: &[VertexId],
    alpha: f64,
    params: &FairingParams,
) -> Vec<(VertexId, Vec3)> {
    if alpha == 0.0 {
        return Vec::new();
    }
    vs.par_iter()
        .map(|&v| {
            let x = mesh.position(v);
            (v, (1.0 - alpha) * x + alpha * interior_target(mesh, flags, v, params))
        })
        .collect()
}

fn boundary_targets(mesh: &Mesh, vs: &[VertexId], beta: f64) -> Result<Vec<(VertexId, Vec3)>, FairingError> {
    if beta == 0.0 {
        return Ok(Vec::new());
    }
    vs.iter()
        .map(|&v| {
            let (a, b) = boundary_neighbors(mesh, v)?;
            let mid = 0.5 * (mesh.position(a) + mesh.position(b));
            Ok((v, (1.0 - beta) * mesh.position(v) + beta * mid))
        })
        .collect()
}

fn apply_interior(mesh: &mut Mesh, flags: &BoundaryFlags, vs: &[VertexId], alpha: f64, params: &FairingParams) {
    for (v, p) in interior_targets(mesh, flags, vs, alpha, params) {
        mesh.set_position(v, p);
    }
}

fn apply_boundary(mesh: &mut Mesh, vs: &[VertexId], beta: f64) -> Result<(), FairingError> {
    for (v, p) in boundary_targets(mesh, vs, beta)? {
        mesh.set_position(v, p);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn hex_patch(center: Vec3) -> Mesh {
        let mut p = vec![center];
        for k in 0..6 {
            let t = PI / 3.0 * k as f64;
            p.push(Vec3::new(t.cos(), t.sin(), 0.0));
        }
        let tris: Vec<[usize; 3]> = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
        Mesh::from_triangles(&p, &tris).unwrap()
    }

    /// Two rings of hexagons so the center has interior (non-boundary) faces.
    fn two_ring(perturb: Vec3) -> Mesh {
        let h = 3f64.sqrt() / 2.0;
        let mut p = Vec::new();
        for j in -2i32..=2 {
            let n = 5 - j.abs();
            let x0 = -(n - 1) as f64 / 2.0;
            for i in 0..n {
                p.push(Vec3::new(x0 + i as f64, j as f64 * h, 0.0));
            }
        }
        let key = |q: &Vec3| ((q.x * 2.0).round() as i64, (q.y / h).round() as i64);
        let lookup: std::collections::HashMap<_, _> = p.iter().enumerate().map(|(i, q)| (key(q), i)).collect();
        let mut tris = Vec::new();
        for q in &p {
            let (x2, y) = key(q);
            let a = lookup[&(x2, y)];
            if let (Some(&b), Some(&c)) = (lookup.get(&(x2 + 2, y)), lookup.get(&(x2 + 1, y + 1))) {
                tris.push([a, b, c]);
            }
            if let (Some(&b), Some(&c)) = (lookup.get(&(x2 + 1, y - 1)), lookup.get(&(x2 + 2, y))) {
                tris.push([a, b, c]);
            }
        }
        let center = lookup[&(0, 0)];
        p[center] += perturb;
        Mesh::from_triangles(&p, &tris).unwrap()
    }

    fn center_of(m: &Mesh) -> VertexId {
        m.vertices().find(|&v| m.valence(v) == 6 && m.neighbors(v).all(|u| !m.is_boundary_vertex(u))).unwrap()
    }

    fn params() -> FairingParams {
        FairingParams::for_rest_length(1.0)
    }

    const WEIGHTS: [FaceWeight; 2] = [FaceWeight::Area, FaceWeight::CircumradiusOverArea];

    #[test]
    fn regular_fan_center_is_fixed() {
        for weight in WEIGHTS {
            let p = FairingParams { weight, ..params() };
            let mut m = two_ring(Vec3::zeros());
            let c = center_of(&m);
            let before = m.position(c);
            smooth_interior(&mut m, &p);
            assert!((m.position(c) - before).norm() < 1e-12);
            let mut fan = hex_patch(Vec3::zeros());
            smooth_interior(&mut fan, &p);
            assert!(fan.position(VertexId(0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_blend_is_identity() {
        let mut m = two_ring(Vec3::new(0.2, -0.1, 0.05));
        let before = m.positions().to_vec();
        let p = FairingParams {
            alpha: 0.0,
            beta: 0.0,
            ..params()
        };
        smooth_interior(&mut m, &p);
        smooth_boundary(&mut m, &p).unwrap();
        assert_eq!(m.positions(), &before[..]);
    }

    fn quality_variance(m: &Mesh, v: VertexId) -> f64 {
        let q: Vec<f64> = m.vertex_faces(v).map(|f| m.triangle(f).quality()).collect();
        let mean = q.iter().sum::<f64>() / q.len() as f64;
        q.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / q.len() as f64
    }

    #[test]
    fn perturbed_vertex_evens_out_qualities() {
        let m = two_ring(Vec3::new(0.25, 0.1, 0.0));
        let c = center_of(&m);
        let before = quality_variance(&m, c);
        for weight in WEIGHTS {
            let mut m = m.clone();
            smooth_subset(&mut m, &[c], &FairingParams { weight, ..params() }).unwrap();
            assert!(quality_variance(&m, c) < before);
        }
    }

    fn mean_quality(m: &Mesh) -> f64 {
        m.faces().map(|f| m.triangle(f).quality()).sum::<f64>() / m.face_count() as f64
    }

    #[test]
    fn repeated_area_weighted_passes_improve_quality() {
        // Jittered lattice; interior vertices move in all three axes.
        let mut m = two_ring(Vec3::zeros());
        let vs: Vec<VertexId> = m.vertices().collect();
        for (k, v) in vs.into_iter().enumerate() {
            let j = 0.15 * Vec3::new((k as f64 * 1.7).sin(), (k as f64 * 2.3).cos(), (k as f64 * 0.9).sin());
            m.set_position(v, m.position(v) + j);
        }
        let p = FairingParams { beta: 0.0, ..params() };
        let start = mean_quality(&m);
        for _ in 0..20 {
            smooth_interior(&mut m, &p);
        }
        let end = mean_quality(&m);
        assert!(end > start + 0.02 && end > 0.95, "{start} -> {end}");
    }

    #[test]
    fn flat_mesh_stays_flat() {
        let mut m = two_ring(Vec3::new(0.25, 0.1, 0.0));
        smooth_interior(&mut m, &params());
        smooth_boundary(&mut m, &params()).unwrap();
        assert!(m.positions().iter().all(|p| p.z.abs() < 1e-12));
    }

    #[test]
    fn subset_matches_full_pass() {
        let base = two_ring(Vec3::new(0.25, 0.1, 0.1));
        let mut full = base.clone();
        smooth_interior(&mut full, &params());
        let interior: Vec<VertexId> = base.vertices().filter(|&v| !base.is_boundary_vertex(v)).collect();
        let mut sub = base.clone();
        smooth_subset(&mut sub, &interior, &params()).unwrap();
        assert_eq!(full.positions(), sub.positions());

        let c = center_of(&base);
        let mut single = base.clone();
        smooth_subset(&mut single, &[c], &params()).unwrap();
        assert_eq!(single.position(c), full.position(c));

        let mut none = base.clone();
        smooth_subset(&mut none, &[], &params()).unwrap();
        assert_eq!(none.positions(), base.positions());
    }

    #[test]
    fn collinear_boundary_vertex_is_unmoved() {
        let mut m = Mesh::from_triangles(
            &[
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(2.0, 0.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
            ],
            &[[0, 1, 3], [1, 2, 3]],
        )
        .unwrap();
        smooth_boundary(&mut m, &params()).unwrap();
        assert_eq!(m.position(VertexId(1)), Vec3::new(1.0, 0.0, 0.0));
    }

    fn total_turning(m: &Mesh) -> f64 {
        let mut sum = 0.0;
        for lp in m.boundary_loops() {
            let n = lp.len();
            for i in 0..n {
                let a = m.position(lp[(i + n - 1) % n]);
                let b = m.position(lp[i]);
                let c = m.position(lp[(i + 1) % n]);
                let (u, w) = (b - a, c - b);
                sum += u.cross(&w).norm().atan2(u.dot(&w));
            }
        }
        sum
    }

    #[test]
    fn zigzag_boundary_turning_decreases() {
        let n = 10;
        let mut p = Vec::new();
        for i in 0..=n {
            p.push(Vec3::new(i as f64, if i % 2 == 0 { 0.0 } else { 0.3 }, 0.0));
            p.push(Vec3::new(i as f64, 2.0, 0.0));
        }
        let mut t = Vec::new();
        for i in 0..n {
            t.push([2 * i, 2 * i + 2, 2 * i + 3]);
            t.push([2 * i, 2 * i + 3, 2 * i + 1]);
        }
        let mut m = Mesh::from_triangles(&p, &t).unwrap();
        let before = total_turning(&m);
        smooth_boundary(&mut m, &params()).unwrap();
        assert!(total_turning(&m) < before);
    }

    #[test]
    fn rigid_motion_equivariance() {
        let base = two_ring(Vec3::new(0.2, -0.15, 0.3));
        let rot = nalgebra::Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let shift = Vec3::new(3.0, -2.0, 0.5);
        let mut a = base.clone();
        smooth_interior(&mut a, &params());
        smooth_boundary(&mut a, &params()).unwrap();
        let mut b = base.clone();
        for p in b.positions_mut() {
            *p = rot * *p + shift;
        }
        smooth_interior(&mut b, &params());
        smooth_boundary(&mut b, &params()).unwrap();
        for (pa, pb) in a.positions().iter().zip(b.positions()) {
            let expect = rot * pa + shift;
            assert!((expect - pb).norm() <= 1e-9 * (1.0 + expect.norm()));
        }
    }
}
