//! Growth sources, geodesic distances and per-vertex growth factors.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mesh::{Mesh, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("mesh has no boundary vertex")]
    EmptyBoundary,
    #[error("source vertex {0} is dead")]
    DeadHandle(VertexId),
    #[error("source set is empty")]
    NoSources,
    #[error("vertex {0} lies in a component without any source")]
    DisconnectedComponentWithoutSource(VertexId),
    #[error("invalid growth parameters: cutoff {cutoff} must be in (0,1), steepness {steepness} in [0,1)")]
    InvalidParams { cutoff: f64, steepness: f64 },
}

/// Shape parameters of the growth-factor curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    /// Branch point `p` in (0, 1); `g(p) = p`.
    pub cutoff: f64,
    /// Steepness `s` in [0, 1).
    pub steepness: f64,
    /// When set, growth is highest at the sources and decays with distance.
    pub high_at_sources: bool,
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self {
            cutoff: 0.5,
            steepness: 0.5,
            high_at_sources: true,
        }
    }
}

impl GrowthParams {
    pub fn validate(&self) -> Result<(), GrowthError> {
        let ok = self.cutoff > 0.0
            && self.cutoff < 1.0
            && self.steepness >= 0.0
            && self.steepness < 1.0;
        if ok {
            Ok(())
        } else {
            Err(GrowthError::InvalidParams {
                cutoff: self.cutoff,
                steepness: self.steepness,
            })
        }
    }

    /// Exponent `c = 2/(1 − s) − 1`.
    pub fn exponent(&self) -> f64 {
        2.0 / (1.0 - self.steepness) - 1.0
    }

    /// Growth factor for a normalized distance already oriented so that 0
    /// means "no growth".
    pub fn curve(&self, x: f64) -> f64 {
        let p = self.cutoff;
        let c = self.exponent();
        if x <= p {
            (x / p).powf(c) * p
        } else {
            1.0 - ((1.0 - x) / (1.0 - p)).powf(c) * (1.0 - p)
        }
    }
}

/// How growth sources are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourcePolicy {
    AllBoundary,
    Explicit(Vec<VertexId>),
    RandomBoundarySubset { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSet {
    pub vertices: Vec<VertexId>,
}

pub fn select_sources(mesh: &Mesh, policy: &SourcePolicy) -> Result<SourceSet, GrowthError> {
    let vertices = match policy {
        SourcePolicy::AllBoundary => {
            let b: Vec<VertexId> = mesh.vertices().filter(|&v| mesh.is_boundary_vertex(v)).collect();
            if b.is_empty() {
                return Err(GrowthError::EmptyBoundary);
            }
            b
        }
        SourcePolicy::Explicit(list) => {
            if let Some(&v) = list.iter().find(|&&v| !mesh.vertex_alive(v)) {
                return Err(GrowthError::DeadHandle(v));
            }
            if list.is_empty() {
                return Err(GrowthError::NoSources);
            }
            let mut l = list.clone();
            l.sort_unstable();
            l.dedup();
            l
        }
        SourcePolicy::RandomBoundarySubset { count, seed } => {
            let mut b: Vec<VertexId> = mesh.vertices().filter(|&v| mesh.is_boundary_vertex(v)).collect();
            if b.is_empty() {
                return Err(GrowthError::EmptyBoundary);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            b.shuffle(&mut rng);
            b.truncate((*count).max(1));
            b.sort_unstable();
            b
        }
    };
    Ok(SourceSet { vertices })
}

#[derive(Debug, PartialEq)]
struct Entry(f64, VertexId);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, ties broken by handle.
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source shortest-path distances over the edge graph, indexed by
/// vertex slot (dead slots are 0).
pub fn geodesic_distances(mesh: &Mesh, sources: &SourceSet) -> Result<Vec<f64>, GrowthError> {
    if sources.vertices.is_empty() {
        return Err(GrowthError::NoSources);
    }
    let mut dist = vec![f64::INFINITY; mesh.vertex_capacity()];
    let mut heap = BinaryHeap::new();
    for &s in &sources.vertices {
        if !mesh.vertex_alive(s) {
            return Err(GrowthError::DeadHandle(s));
        }
        dist[s.idx()] = 0.0;
        heap.push(Entry(0.0, s));
    }
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v.idx()] {
            continue;
        }
        let pv = mesh.position(v);
        for u in mesh.neighbors(v) {
            let nd = d + (mesh.position(u) - pv).norm();
            if nd < dist[u.idx()] {
                dist[u.idx()] = nd;
                heap.push(Entry(nd, u));
            }
        }
    }
    for (i, d) in dist.iter_mut().enumerate() {
        if mesh.vertex_alive(VertexId(i as u32)) {
            if d.is_infinite() {
                return Err(GrowthError::DisconnectedComponentWithoutSource(VertexId(i as u32)));
            }
        } else {
            *d = 0.0;
        }
    }
    Ok(dist)
}

/// Per-vertex distance, normalized distance and growth factor, indexed by
/// vertex slot. Dead slots hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthField {
    pub distance: Vec<f64>,
    pub normalized: Vec<f64>,
    pub factor: Vec<f64>,
}

impl GrowthField {
    /// A field with the given constant factor everywhere.
    pub fn uniform(mesh: &Mesh, g: f64) -> Self {
        let n = mesh.vertex_capacity();
        Self {
            distance: vec![0.0; n],
            normalized: vec![0.0; n],
            factor: vec![g; n],
        }
    }

    #[inline]
    pub fn g(&self, v: VertexId) -> f64 {
        self.factor.get(v.idx()).copied().unwrap_or(0.0)
    }

    /// Appends entries for a newly created vertex slot.
    pub fn push(&mut self, distance: f64, normalized: f64, factor: f64) {
        self.distance.push(distance);
        self.normalized.push(normalized);
        self.factor.push(factor);
    }

    /// Pads with zeros up to `n` slots.
    pub fn resize(&mut self, n: usize) {
        self.distance.resize(n, 0.0);
        self.normalized.resize(n, 0.0);
        self.factor.resize(n, 0.0);
    }
}

pub fn growth_factors(distances: &[f64], params: &GrowthParams) -> Result<GrowthField, GrowthError> {
    params.validate()?;
    let max = distances.iter().copied().fold(0.0f64, f64::max);
    let normalized: Vec<f64> = distances
        .iter()
        .map(|&d| if max > 0.0 { d / max } else { 0.0 })
        .collect();
    let factor = normalized
        .iter()
        .map(|&x| {
            let x = if params.high_at_sources { 1.0 - x } else { x };
            params.curve(x).clamp(0.0, 1.0)
        })
        .collect();
    Ok(GrowthField {
        distance: distances.to_vec(),
        normalized,
        factor,
    })
}

/// Sources, distances and factors in one call.
pub fn compute_growth_field(
    mesh: &Mesh,
    policy: &SourcePolicy,
    params: &GrowthParams,
) -> Result<GrowthField, GrowthError> {
    let sources = select_sources(mesh, policy)?;
    let d = geodesic_distances(mesh, &sources)?;
    let mut field = growth_factors(&d, params)?;
    for (i, g) in field.factor.iter_mut().enumerate() {
        if !mesh.vertex_alive(VertexId(i as u32)) {
            *g = 0.0;
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Vec3;

    fn params(p: f64, s: f64) -> GrowthParams {
        GrowthParams {
            cutoff: p,
            steepness: s,
            high_at_sources: false,
        }
    }

    #[test]
    fn curve_fixed_points() {
        for &(p, s) in &[(0.5, 0.5), (0.3, 0.0), (0.8, 0.9)] {
            let g = params(p, s);
            assert_eq!(g.curve(0.0), 0.0);
            assert_eq!(g.curve(p), p);
            assert_eq!(g.curve(1.0), 1.0);
        }
    }

    #[test]
    fn curve_direct_evaluations() {
        let g = params(0.5, 0.5);
        assert_eq!(g.exponent(), 3.0);
        assert!((g.curve(0.25) - 0.0625).abs() < 1e-12);
        assert!((g.curve(0.75) - 0.9375).abs() < 1e-12);
    }

    #[test]
    fn zero_steepness_is_identity() {
        let g = params(0.37, 0.0);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((g.curve(x) - x).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(growth_factors(&[0.0], &params(0.0, 0.5)).is_err());
        assert!(growth_factors(&[0.0], &params(1.0, 0.5)).is_err());
        assert!(growth_factors(&[0.0], &params(0.5, 1.0)).is_err());
        assert!(growth_factors(&[0.0], &params(0.5, -0.1)).is_err());
    }

    #[test]
    fn all_zero_distances_normalize_to_zero() {
        let f = growth_factors(&[0.0, 0.0, 0.0], &params(0.5, 0.5)).unwrap();
        assert_eq!(f.normalized, vec![0.0; 3]);
        assert_eq!(f.factor, vec![0.0; 3]);
        let hi = growth_factors(&[0.0, 0.0], &GrowthParams::default()).unwrap();
        assert_eq!(hi.factor, vec![1.0; 2]);
    }

    fn strip(n: usize) -> Mesh {
        let mut p = Vec::new();
        for i in 0..=n {
            p.push(Vec3::new(i as f64, 0.0, 0.0));
            p.push(Vec3::new(i as f64, 1.0, 0.0));
        }
        let mut t = Vec::new();
        for i in 0..n {
            let (a, b, c, d) = (2 * i, 2 * i + 2, 2 * i + 3, 2 * i + 1);
            t.push([a, b, c]);
            t.push([a, c, d]);
        }
        Mesh::from_triangles(&p, &t).unwrap()
    }

    #[test]
    fn explicit_interior_source_is_accepted() {
        let m = strip(4);
        let s = select_sources(&m, &SourcePolicy::Explicit(vec![VertexId(4)])).unwrap();
        assert_eq!(s.vertices, vec![VertexId(4)]);
        assert!(matches!(
            select_sources(&m, &SourcePolicy::Explicit(vec![VertexId(99)])),
            Err(GrowthError::DeadHandle(_))
        ));
    }

    #[test]
    fn random_subset_is_seeded() {
        let m = strip(10);
        let pol = SourcePolicy::RandomBoundarySubset { count: 4, seed: 7 };
        let a = select_sources(&m, &pol).unwrap();
        let b = select_sources(&m, &pol).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.vertices.len(), 4);
    }

    #[test]
    fn distances_are_zero_on_sources_and_edge_lipschitz() {
        let m = strip(6);
        let s = SourceSet {
            vertices: vec![VertexId(0), VertexId(13)],
        };
        let d = geodesic_distances(&m, &s).unwrap();
        assert_eq!(d[0], 0.0);
        assert_eq!(d[13], 0.0);
        for e in m.edges() {
            let (a, b) = m.edge_vertices(e);
            assert!(d[a.idx()] <= d[b.idx()] + m.edge_length(e) + 1e-12);
        }
    }

    #[test]
    fn disconnected_component_is_reported() {
        let p = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(5.0, 0.0, 0.0),
            Vec3::new(6.0, 0.0, 0.0),
            Vec3::new(5.0, 1.0, 0.0),
        ];
        let m = Mesh::from_triangles(&p, &[[0, 1, 2], [3, 4, 5]]).unwrap();
        let s = SourceSet {
            vertices: vec![VertexId(0)],
        };
        assert!(matches!(
            geodesic_distances(&m, &s),
            Err(GrowthError::DisconnectedComponentWithoutSource(_))
        ));
    }
}
