//! Local remeshing passes: growth-driven subdivision, Delaunay flips, short
//! edge collapses and ear pruning.

use std::f64::consts::PI;

use crate::forces::RestState;
use crate::growth::GrowthField;
use crate::mesh::{EdgeId, Mesh, Vec3, VertexId};

/// Slack on the opposite-angle sum before an edge counts as non-Delaunay.
pub const ANGLE_EPS: f64 = 1e-9;

/// Length that the split threshold is scaled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitLength {
    /// The rest length `L0`.
    Rest,
    /// The edge's own current length.
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRule {
    pub k: f64,
    pub length: SplitLength,
}

impl Default for SplitRule {
    fn default() -> Self {
        Self {
            k: 1.0,
            length: SplitLength::Rest,
        }
    }
}

impl SplitRule {
    pub fn should_split(&self, len: f64, g1: f64, g2: f64, rest_length: f64) -> bool {
        let base = match self.length {
            SplitLength::Rest => rest_length,
            SplitLength::Current => len,
        };
        len > self.k * base / (1.0 + 0.5 * (g1 + g2))
    }
}

/// Position of the vertex inserted on edge `e`: the midpoint on the boundary,
/// the 3/8–1/8 stencil of the hinge otherwise.
pub fn split_position(mesh: &Mesh, e: EdgeId) -> Vec3 {
    match mesh.hinge(e) {
        Ok([a, b, c, d]) => {
            0.375 * (mesh.position(a) + mesh.position(b)) + 0.125 * (mesh.position(c) + mesh.position(d))
        }
        Err(_) => {
            let (a, b) = mesh.edge_vertices(e);
            0.5 * (mesh.position(a) + mesh.position(b))
        }
    }
}

/// Splits, in handle order, every edge that meets the split rule at pass
/// start. The growth field is extended with the endpoint average for each new
/// vertex. Returns the number of splits.
pub fn subdivide_pass(mesh: &mut Mesh, growth: &mut GrowthField, rest: &RestState, rule: &SplitRule) -> usize {
    growth.resize(mesh.vertex_capacity());
    let candidates: Vec<EdgeId> = mesh
        .edges()
        .filter(|&e| {
            let (a, b) = mesh.edge_vertices(e);
            rule.should_split(mesh.edge_length(e), growth.g(a), growth.g(b), rest.rest_length)
        })
        .collect();
    let mut count = 0;
    for e in candidates {
        if !mesh.edge_alive(e) {
            continue;
        }
        let (a, b) = mesh.edge_vertices(e);
        let p = split_position(mesh, e);
        let avg = |x: &[f64]| 0.5 * (x[a.idx()] + x[b.idx()]);
        let (d, n, g) = (avg(&growth.distance), avg(&growth.normalized), avg(&growth.factor));
        if let Ok(v) = mesh.split_edge(e, p) {
            debug_assert_eq!(v.idx(), growth.factor.len());
            growth.push(d, n, g);
            count += 1;
        }
    }
    count
}

fn angle_at(apex: Vec3, p: Vec3, q: Vec3) -> f64 {
    let u = p - apex;
    let v = q - apex;
    u.cross(&v).norm().atan2(u.dot(&v))
}

/// Sum of the two angles opposite interior edge `e`.
pub fn opposite_angle_sum(mesh: &Mesh, e: EdgeId) -> Option<f64> {
    let [a, b, c, d] = mesh.hinge(e).ok()?;
    let (pa, pb) = (mesh.position(a), mesh.position(b));
    Some(angle_at(mesh.position(c), pa, pb) + angle_at(mesh.position(d), pa, pb))
}

pub fn is_locally_delaunay(mesh: &Mesh, e: EdgeId) -> bool {
    opposite_angle_sum(mesh, e).is_none_or(|s| s <= PI + ANGLE_EPS)
}

/// Visits every interior edge alive at pass start once, in handle order, and
/// flips it when its opposite angles sum past π and the flip is valid.
pub fn delaunay_flip_pass(mesh: &mut Mesh) -> usize {
    let edges: Vec<EdgeId> = mesh.edges().filter(|&e| !mesh.is_boundary_edge(e)).collect();
    let mut count = 0;
    for e in edges {
        if !mesh.edge_alive(e) || is_locally_delaunay(mesh, e) {
            continue;
        }
        if mesh.flip_edge(e).is_ok() {
            count += 1;
        }
    }
    count
}

/// Outcome of a collapse pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CollapseStats {
    pub collapsed: usize,
    pub refused: usize,
}

/// Collapses edges shorter than `threshold` (absolute length), sweeping in
/// handle order until a sweep collapses nothing.
pub fn collapse_pass(mesh: &mut Mesh, threshold: f64) -> CollapseStats {
    let mut stats = CollapseStats::default();
    loop {
        let short: Vec<EdgeId> = mesh.edges().filter(|&e| mesh.edge_length(e) < threshold).collect();
        let mut collapsed = 0;
        let mut refused = 0;
        for e in short {
            if !mesh.edge_alive(e) || mesh.edge_length(e) >= threshold {
                continue;
            }
            match mesh.collapse_edge(e) {
                Ok(_) => collapsed += 1,
                Err(_) => refused += 1,
            }
        }
        stats.collapsed += collapsed;
        if collapsed == 0 {
            stats.refused = refused;
            return stats;
        }
    }
}

/// Removes ear tips (vertices with two neighbors, both on the boundary)
/// until none remain. The last face is never removed.
pub fn ear_removal_pass(mesh: &mut Mesh) -> usize {
    let mut count = 0;
    loop {
        let ears: Vec<VertexId> = mesh
            .vertices()
            .filter(|&v| mesh.valence(v) == 2 && mesh.neighbors(v).all(|u| mesh.is_boundary_vertex(u)))
            .collect();
        let mut removed = 0;
        for v in ears {
            if mesh.face_count() <= 1 {
                return count;
            }
            if mesh.vertex_alive(v) && mesh.valence(v) == 2 && mesh.remove_vertex(v).is_ok() {
                removed += 1;
            }
        }
        count += removed;
        if removed == 0 {
            return count;
        }
    }
}
