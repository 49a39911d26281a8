use std::collections::HashMap;

use crate::mesh::{Vec3, VertexId};

type Cell = [i64; 3];

/// Uniform hash grid over vertex positions.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    cell: f64,
    buckets: HashMap<Cell, Vec<VertexId>>,
}

impl SpatialIndex {
    /// Indexes the given `(handle, position)` pairs. Buckets keep insertion
    /// order, so feed handles in ascending order for sorted query output.
    pub fn build(points: impl IntoIterator<Item = (VertexId, Vec3)>, cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "grid cell must be positive");
        let mut buckets: HashMap<Cell, Vec<VertexId>> = HashMap::new();
        for (v, p) in points {
            buckets.entry(cell_of(p, cell)).or_default().push(v);
        }
        Self { cell, buckets }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    /// Every indexed vertex that may lie within `radius` of `center`, sorted
    /// by handle. Callers filter by exact distance.
    pub fn query(&self, center: Vec3, radius: f64) -> Vec<VertexId> {
        let lo = cell_of(center - Vec3::repeat(radius), self.cell);
        let hi = cell_of(center + Vec3::repeat(radius), self.cell);
        let mut out = Vec::new();
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    if let Some(b) = self.buckets.get(&[x, y, z]) {
                        out.extend_from_slice(b);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn cell_of(p: Vec3, cell: f64) -> Cell {
    [
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point() {
        let g = SpatialIndex::build([(VertexId(0), Vec3::new(0.3, -2.0, 5.0))], 0.7);
        assert_eq!(g.query(Vec3::new(0.3, -2.0, 5.0), 0.0), vec![VertexId(0)]);
        assert_eq!(g.query(Vec3::new(0.3, -2.0, 5.0), 3.0), vec![VertexId(0)]);
    }

    #[test]
    fn cube_lattice_matches_brute_force() {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    let id = VertexId(pts.len() as u32);
                    pts.push((id, Vec3::new(i as f64 * 0.5, j as f64 * 0.5, k as f64 * 0.5)));
                }
            }
        }
        let g = SpatialIndex::build(pts.iter().copied(), 0.8);
        for r in [0.0, 0.5, 0.75, 1.3] {
            for &(_, c) in pts.iter().step_by(37) {
                let got: Vec<VertexId> = g
                    .query(c, r)
                    .into_iter()
                    .filter(|v| (pts[v.idx()].1 - c).norm() <= r)
                    .collect();
                let want: Vec<VertexId> = pts.iter().filter(|(_, p)| (p - c).norm() <= r).map(|(v, _)| *v).collect();
                assert_eq!(got, want);
            }
        }
    }
}
