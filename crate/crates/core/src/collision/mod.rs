//! Vertex–vertex self-collision.
//!
//! The corrective pass gives every vertex an ellipsoid aligned with its
//! normal; non-adjacent vertices that fall inside each other's ellipsoids
//! are pushed apart. The growth variant uses plain spheres of radius `L0` as
//! the only inter-vertex force.

mod grid;

pub use grid::SpatialIndex;

use rayon::prelude::*;
use thiserror::Error;

use crate::forces::{ForceField, RestState};
use crate::growth::GrowthField;
use crate::mesh::{Mesh, Vec3, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollisionError {
    #[error("vertex {0} has no incident edge")]
    IsolatedVertex(VertexId),
    #[error("invalid collision parameter: {0}")]
    InvalidParams(&'static str),
}

/// Per-vertex ellipsoid radii and orientation, indexed by vertex slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ColliderSet {
    pub normal_radius: Vec<f64>,
    pub tangent_radius: Vec<f64>,
    pub normal: Vec<Vec3>,
}

impl ColliderSet {
    /// Largest radius of any collider; no event can happen beyond it.
    pub fn reach(&self) -> f64 {
        self.normal_radius
            .iter()
            .chain(&self.tangent_radius)
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Median with the mean of the two middle values for even counts.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => values[n / 2],
        _ => 0.5 * (values[n / 2 - 1] + values[n / 2]),
    }
}

pub fn build_colliders(
    mesh: &Mesh,
    rest_length: f64,
    normal_factor: f64,
    tangent_factor: f64,
) -> Result<ColliderSet, CollisionError> {
    if !(normal_factor > 0.0 && tangent_factor > 0.0) {
        return Err(CollisionError::InvalidParams("collider factors must be positive"));
    }
    let n = mesh.vertex_capacity();
    let mut set = ColliderSet {
        normal_radius: vec![0.0; n],
        tangent_radius: vec![0.0; n],
        normal: mesh.vertex_normals(),
    };
    let mut lengths = Vec::new();
    for v in mesh.vertices() {
        lengths.clear();
        lengths.extend(mesh.outgoing(v).iter().map(|h| mesh.edge_length(h.edge())));
        if lengths.is_empty() {
            return Err(CollisionError::IsolatedVertex(v));
        }
        set.normal_radius[v.idx()] = normal_factor * rest_length;
        set.tangent_radius[v.idx()] = tangent_factor * median(&mut lengths);
    }
    Ok(set)
}

/// How the asymmetric penetration measure is turned into forces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairEvaluation {
    /// One evaluation with the lower handle's normal; equal and opposite forces.
    #[default]
    LowerHandle,
    /// Each vertex is pushed by the evaluation that uses its own normal.
    BothOrders,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionParams {
    pub stiffness: f64,
    /// Blend of the raw force toward the 1-ring mean.
    pub smoothing: f64,
    pub evaluation: PairEvaluation,
}

impl Default for CollisionParams {
    fn default() -> Self {
        Self {
            stiffness: 0.5,
            smoothing: 0.5,
            evaluation: PairEvaluation::LowerHandle,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionOutcome {
    /// Smoothed per-vertex displacement.
    pub forces: ForceField,
    /// Per-vertex forces before 1-ring smoothing.
    pub raw: ForceField,
    /// Vertices taking part in at least one event, sorted.
    pub involved: Vec<VertexId>,
    /// Colliding pairs `(i, j)` with `i < j`, sorted.
    pub pairs: Vec<(VertexId, VertexId)>,
}

impl CollisionOutcome {
    pub fn events(&self) -> usize {
        self.pairs.len()
    }
}

/// Penetration measure of `pj` in the frame of vertex `i`; below 1 means contact.
pub fn penetration(d: Vec3, normal_i: Vec3, rn: f64, rt: f64) -> f64 {
    let dn = d.dot(&normal_i) * normal_i;
    let dt = d - dn;
    dn.norm_squared() / (rn * rn) + dt.norm_squared() / (rt * rt)
}

/// Unit direction from `i` to `j`, or the normal of `i` when they coincide.
fn separation_direction(d: Vec3, normal_i: Vec3) -> Vec3 {
    let len = d.norm();
    if len > 0.0 {
        d / len
    } else if normal_i.norm_squared() > 0.0 {
        normal_i.normalize()
    } else {
        Vec3::z()
    }
}

pub fn corrective_collision(mesh: &Mesh, colliders: &ColliderSet, params: &CollisionParams) -> CollisionOutcome {
    let n = mesh.vertex_capacity();
    let reach = colliders.reach();
    let mut raw = ForceField::zeros(n);
    let mut pairs = Vec::new();
    if reach > 0.0 && mesh.vertex_count() > 1 {
        let index = SpatialIndex::build(mesh.vertices().map(|v| (v, mesh.position(v))), reach);
        let verts: Vec<VertexId> = mesh.vertices().collect();
        // Per-pair contributions: (i, j, force on i, force on j).
        let hits: Vec<Vec<(VertexId, VertexId, Vec3, Vec3)>> = verts
            .par_iter()
            .map(|&i| {
                let pi = mesh.position(i);
                let mut out = Vec::new();
                for j in index.query(pi, reach) {
                    if j <= i || mesh.are_adjacent(i, j) {
                        continue;
                    }
                    if let Some(hit) = pair_forces(mesh, colliders, params, i, j) {
                        out.push((i, j, hit.0, hit.1));
                    }
                }
                out
            })
            .collect();
        for (i, j, fi, fj) in hits.into_iter().flatten() {
            raw.forces[i.idx()] += fi;
            raw.forces[j.idx()] += fj;
            pairs.push((i, j));
        }
    }
    let mut involved: Vec<VertexId> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    involved.sort_unstable();
    involved.dedup();
    let forces = smooth_forces(mesh, &raw, params.smoothing);
    CollisionOutcome {
        forces,
        raw,
        involved,
        pairs,
    }
}

fn pair_forces(
    mesh: &Mesh,
    colliders: &ColliderSet,
    params: &CollisionParams,
    i: VertexId,
    j: VertexId,
) -> Option<(Vec3, Vec3)> {
    let d = mesh.position(j) - mesh.position(i);
    let rn = colliders.normal_radius[i.idx()].max(colliders.normal_radius[j.idx()]);
    let rt = colliders.tangent_radius[i.idx()].max(colliders.tangent_radius[j.idx()]);
    let (ni, nj) = (colliders.normal[i.idx()], colliders.normal[j.idx()]);
    let k = params.stiffness;
    match params.evaluation {
        PairEvaluation::LowerHandle => {
            let p = penetration(d, ni, rn, rt);
            (p < 1.0).then(|| {
                let f = k * (1.0 - p) * separation_direction(d, ni);
                (-f, f)
            })
        }
        PairEvaluation::BothOrders => {
            let pij = penetration(d, ni, rn, rt);
            let pji = penetration(-d, nj, rn, rt);
            if pij >= 1.0 && pji >= 1.0 {
                return None;
            }
            let fi = -k * (1.0 - pij).max(0.0) * separation_direction(d, ni);
            let fj = -k * (1.0 - pji).max(0.0) * separation_direction(-d, nj);
            Some((fi, fj))
        }
    }
}

/// `F' = (1 − λ)·F + λ·mean of F over the 1-ring`.
pub fn smooth_forces(mesh: &Mesh, raw: &ForceField, lambda: f64) -> ForceField {
    let mut out = ForceField::zeros(raw.forces.len());
    for v in mesh.vertices() {
        let own = raw.forces[v.idx()];
        let (sum, count) = mesh
            .neighbors(v)
            .fold((Vec3::zeros(), 0usize), |(s, c), u| (s + raw.forces[u.idx()], c + 1));
        let mean = if count > 0 { sum / count as f64 } else { Vec3::zeros() };
        out.forces[v.idx()] = (1.0 - lambda) * own + lambda * mean;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCollisionParams {
    pub stiffness: f64,
    /// Pairs where both growth factors are below this are skipped; 0 keeps all.
    pub g_min: f64,
}

impl Default for GrowthCollisionParams {
    fn default() -> Self {
        Self {
            stiffness: 2.0,
            g_min: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCollisionOutcome {
    pub field: ForceField,
    /// Pairs found at identical positions and separated along the x axis.
    pub coincident: Vec<(VertexId, VertexId)>,
}

/// Spherical repulsion of magnitude `k·(L0 − ‖d‖)` between every pair closer
/// than `L0`.
pub fn growth_collision(
    mesh: &Mesh,
    rest: &RestState,
    growth: &GrowthField,
    params: &GrowthCollisionParams,
) -> Result<GrowthCollisionOutcome, CollisionError> {
    if !(0.0..=1.0).contains(&params.g_min) {
        return Err(CollisionError::InvalidParams("g_min must lie in [0, 1]"));
    }
    let l0 = rest.rest_length;
    let mut field = ForceField::for_mesh(mesh);
    let mut coincident = Vec::new();
    let index = SpatialIndex::build(mesh.vertices().map(|v| (v, mesh.position(v))), l0);
    let verts: Vec<VertexId> = mesh.vertices().collect();
    let hits: Vec<Vec<(VertexId, VertexId, Vec3, bool)>> = verts
        .par_iter()
        .map(|&i| {
            let pi = mesh.position(i);
            let mut out = Vec::new();
            for j in index.query(pi, l0) {
                if j <= i || growth.g(i).max(growth.g(j)) < params.g_min {
                    continue;
                }
                let d = pi - mesh.position(j);
                let len = d.norm();
                if len >= l0 {
                    continue;
                }
                let (dir, same) = if len > 0.0 { (d / len, false) } else { (-Vec3::x(), true) };
                out.push((i, j, params.stiffness * (l0 - len) * dir, same));
            }
            out
        })
        .collect();
    for (i, j, f, same) in hits.into_iter().flatten() {
        field.forces[i.idx()] += f;
        field.forces[j.idx()] -= f;
        if same {
            coincident.push((i, j));
        }
    }
    Ok(GrowthCollisionOutcome { field, coincident })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two separate triangles stacked along z with apexes `gap` apart.
    fn two_sheets(gap: f64) -> Mesh {
        let p = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, gap),
            Vec3::new(1.0, 0.0, gap),
            Vec3::new(0.0, 1.0, gap),
        ];
        Mesh::from_triangles(&p, &[[0, 1, 2], [3, 4, 5]]).unwrap()
    }

    fn spheres_off(set: &mut ColliderSet, rn: f64) {
        set.normal_radius.iter_mut().for_each(|r| *r = rn);
        set.tangent_radius.iter_mut().for_each(|r| *r = 1e-3);
    }

    #[test]
    fn median_convention() {
        assert_eq!(median(&mut [0.1, 1.0, 1.0, 1.0, 1.0, 10.0]), 1.0);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [1.0, 2.0]), 1.5);
    }

    #[test]
    fn collider_radii() {
        let m = two_sheets(1.0);
        let c = build_colliders(&m, 2.0, 0.25, 0.9).unwrap();
        assert_eq!(c.normal_radius[0], 0.5);
        // Corner 0 sees lengths {1, 1}.
        assert!((c.tangent_radius[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn normal_contact_boundary_is_strict() {
        let m = two_sheets(0.25);
        let mut c = build_colliders(&m, 1.0, 0.25, 0.9).unwrap();
        spheres_off(&mut c, 0.25);
        // Tangent radius tiny, so only the vertically stacked pairs can touch.
        let out = corrective_collision(&m, &c, &CollisionParams::default());
        assert_eq!(out.events(), 0);
    }

    #[test]
    fn half_radius_normal_separation() {
        let m = two_sheets(0.125);
        let mut c = build_colliders(&m, 1.0, 0.25, 0.9).unwrap();
        spheres_off(&mut c, 0.25);
        let params = CollisionParams {
            smoothing: 0.0,
            ..Default::default()
        };
        let out = corrective_collision(&m, &c, &params);
        assert_eq!(out.pairs, vec![(VertexId(0), VertexId(3)), (VertexId(1), VertexId(4)), (VertexId(2), VertexId(5))]);
        for (i, j) in out.pairs {
            assert!((out.raw.forces[i.idx()] - Vec3::new(0.0, 0.0, -0.375)).norm() < 1e-12);
            assert!((out.raw.forces[j.idx()] - Vec3::new(0.0, 0.0, 0.375)).norm() < 1e-12);
        }
        assert!(out.raw.total().norm() < 1e-12);
    }

    #[test]
    fn adjacent_vertices_never_collide() {
        let m = Mesh::from_triangles(
            &[Vec3::new(0.0, 0.0, 0.0), Vec3::new(1e-3, 0.0, 0.0), Vec3::new(0.0, 1e-3, 0.0)],
            &[[0, 1, 2]],
        )
        .unwrap();
        let c = build_colliders(&m, 1.0, 0.25, 0.9).unwrap();
        let out = corrective_collision(&m, &c, &CollisionParams::default());
        assert_eq!(out.events(), 0);
        assert_eq!(out.forces.max_norm(), 0.0);
    }

    #[test]
    fn coincident_vertices_separate_along_normal() {
        let m = two_sheets(0.0);
        let mut c = build_colliders(&m, 1.0, 0.25, 0.9).unwrap();
        spheres_off(&mut c, 0.25);
        let out = corrective_collision(&m, &c, &CollisionParams::default());
        assert_eq!(out.events(), 3);
        assert!(out.raw.forces.iter().all(|f| f.iter().all(|x| x.is_finite())));
        assert!(out.raw.forces[3].z > 0.0 && out.raw.forces[0].z < 0.0);
    }

    #[test]
    fn smoothing_blends_with_neighbors() {
        let m = two_sheets(5.0);
        let mut raw = ForceField::for_mesh(&m);
        raw.forces[0] = Vec3::new(2.0, 0.0, 0.0);
        let s = smooth_forces(&m, &raw, 0.5);
        assert_eq!(s.forces[0], Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(s.forces[1], Vec3::new(0.5, 0.0, 0.0));
        assert_eq!(s.forces[3], Vec3::zeros());
    }

    #[test]
    fn growth_collision_cutoff() {
        let rest = RestState::new(1.0, 2.0, 0.0).unwrap();
        // In-sheet edges are exactly L0 or longer; stacked pairs sit 0.5 apart.
        let m = two_sheets(0.5);
        let g = GrowthField::uniform(&m, 1.0);
        let f = growth_collision(&m, &rest, &g, &Default::default()).unwrap().field;
        assert!(f.total().norm() < 1e-12);
        for v in 0..3 {
            assert!((f.forces[v] - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
            assert!((f.forces[v + 3] - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        }
        let far = two_sheets(1.0);
        let g = GrowthField::uniform(&far, 1.0);
        assert_eq!(growth_collision(&far, &rest, &g, &Default::default()).unwrap().field.max_norm(), 0.0);
    }

    #[test]
    fn growth_collision_half_length_pair() {
        let m = Mesh::from_triangles(
            &[
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(2.0, 0.0, 0.0),
                Vec3::new(0.0, 2.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
                Vec3::new(2.0, 0.0, 1.0),
                Vec3::new(0.0, 2.0, 1.0),
            ],
            &[[0, 1, 2], [3, 4, 5]],
        )
        .unwrap();
        let rest = RestState::new(2.0, 2.0, 0.0).unwrap();
        let g = GrowthField::uniform(&m, 1.0);
        let f = growth_collision(&m, &rest, &g, &Default::default()).unwrap().field;
        // Stacked pairs 1 apart, L0 = 2: magnitude 2·(2 − 1) = 2 = L0.
        assert!((f.forces[0] - Vec3::new(0.0, 0.0, -2.0)).norm() < 1e-12);
        assert!((f.forces[3] - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-12);

        let cold = GrowthField::uniform(&m, 0.05);
        let f = growth_collision(&m, &rest, &cold, &Default::default()).unwrap().field;
        assert_eq!(f.max_norm(), 0.0);
    }
}
