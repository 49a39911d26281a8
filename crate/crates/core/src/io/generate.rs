//! Initial surfaces with edge lengths near 1.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::IoError;
use crate::mesh::{Mesh, Vec3, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Disk,
    Annulus,
    MoebiusLike,
    PuncturedTorus,
}

impl SurfaceKind {
    pub const ALL: [SurfaceKind; 4] = [
        SurfaceKind::Disk,
        SurfaceKind::Annulus,
        SurfaceKind::MoebiusLike,
        SurfaceKind::PuncturedTorus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::Disk => "disk",
            SurfaceKind::Annulus => "annulus",
            SurfaceKind::MoebiusLike => "moebius-like",
            SurfaceKind::PuncturedTorus => "punctured-torus",
        }
    }
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SurfaceKind {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| IoError::InvalidSpec(format!("unknown surface kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: SurfaceKind,
    /// Rings (disk, annulus), rows across the strip, or tube segments (torus).
    pub radial: usize,
    /// Boundary vertices (disk), or segments around the main loop.
    pub angular: usize,
    /// Innermost ring radius of the annulus, in edge lengths.
    pub inner_radius: usize,
    /// Rings removed around the torus puncture.
    pub hole_rings: usize,
    /// Normal noise amplitude, in edge lengths.
    pub perturbation: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Default resolutions per kind, giving 130 to 250 vertices.
    pub fn new(kind: SurfaceKind, seed: u64) -> Self {
        let (radial, angular) = match kind {
            SurfaceKind::Disk => (6, 38),
            SurfaceKind::Annulus => (4, 0),
            SurfaceKind::MoebiusLike => (4, 60),
            SurfaceKind::PuncturedTorus => (8, 32),
        };
        Self {
            kind,
            radial,
            angular,
            inner_radius: 3,
            hole_rings: 1,
            perturbation: 0.02,
            seed,
        }
    }

    fn validate(&self) -> Result<(), IoError> {
        let bad = |m: &str| Err(IoError::InvalidSpec(m.to_string()));
        if self.radial < 1 {
            return bad("radial resolution must be at least 1");
        }
        match self.kind {
            SurfaceKind::Disk if self.angular < 3 => bad("disk needs at least 3 boundary vertices"),
            SurfaceKind::Annulus if self.inner_radius < 1 => bad("annulus inner radius must be at least 1"),
            SurfaceKind::MoebiusLike if self.angular < 6 => bad("strip needs at least 6 segments"),
            SurfaceKind::PuncturedTorus if self.radial < 3 || self.angular < 3 * self.radial || self.angular % 2 == 1 => {
                bad("torus needs at least 3 tube segments and an even count around of at least 3x that")
            }
            SurfaceKind::PuncturedTorus if self.hole_rings < 1 => bad("torus hole needs at least one ring"),
            _ if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) => bad("perturbation must be non-negative"),
            _ => Ok(()),
        }
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Mesh, IoError> {
    spec.validate()?;
    let (positions, triangles) = match spec.kind {
        SurfaceKind::Disk => disk(spec.radial, spec.angular),
        SurfaceKind::Annulus => annulus(spec.inner_radius, spec.radial),
        SurfaceKind::MoebiusLike => moebius(spec.radial, spec.angular),
        SurfaceKind::PuncturedTorus => punctured_torus(spec.radial, spec.angular, spec.hole_rings),
    };
    let mut mesh = Mesh::from_triangles(&positions, &triangles)?;
    perturb(&mut mesh, spec.perturbation, spec.seed);
    if spec.kind == SurfaceKind::MoebiusLike {
        close_seam(&mut mesh, spec.radial, spec.angular);
    }
    Ok(mesh)
}

fn perturb(mesh: &mut Mesh, amplitude: f64, seed: u64) {
    if amplitude == 0.0 {
        return;
    }
    let normals = mesh.vertex_normals();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let live: Vec<VertexId> = mesh.vertices().collect();
    for v in live {
        let t: f64 = rng.random_range(-amplitude..=amplitude);
        let p = mesh.position(v) + t * normals[v.idx()];
        mesh.set_position(v, p);
    }
}

/// Puts the last row of the strip back onto the reversed first row, which
/// the per-vertex noise pulled apart.
fn close_seam(mesh: &mut Mesh, rows: usize, segments: usize) {
    let id = |i: usize, j: usize| VertexId((i * (rows + 1) + j) as u32);
    for j in 0..=rows {
        let p = mesh.position(id(0, rows - j));
        mesh.set_position(id(segments, j), p);
    }
}

fn ring(radius: f64, count: usize) -> Vec<Vec3> {
    (0..count)
        .map(|k| {
            let t = TAU * k as f64 / count as f64;
            Vec3::new(radius * t.cos(), radius * t.sin(), 0.0)
        })
        .collect()
}

/// Triangulates the band between two concentric rings of indices, both
/// starting at angle 0, by advancing whichever ring has the nearer next angle.
fn zip_rings(inner: &[usize], outer: &[usize], tris: &mut Vec<[usize; 3]>) {
    let (n, m) = (inner.len(), outer.len());
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        let next_inner = (i + 1) as f64 / n as f64;
        let next_outer = (j + 1) as f64 / m as f64;
        if i == n || (j < m && next_outer <= next_inner) {
            tris.push([inner[i % n], outer[j], outer[(j + 1) % m]]);
            j += 1;
        } else {
            tris.push([inner[i], outer[j % m], inner[(i + 1) % n]]);
            i += 1;
        }
    }
}

fn ring_count(radius: usize, outer: usize, rings: usize) -> usize {
    ((outer * radius) as f64 / rings as f64).round().max(3.0) as usize
}

fn disk(rings: usize, boundary: usize) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let mut p = vec![Vec3::zeros()];
    let mut tris = Vec::new();
    let mut prev: Vec<usize> = Vec::new();
    for r in 1..=rings {
        let count = ring_count(r, boundary, rings);
        let start = p.len();
        p.extend(ring(r as f64, count));
        let cur: Vec<usize> = (start..start + count).collect();
        if r == 1 {
            for k in 0..count {
                tris.push([0, cur[k], cur[(k + 1) % count]]);
            }
        } else {
            zip_rings(&prev, &cur, &mut tris);
        }
        prev = cur;
    }
    (p, tris)
}

fn annulus(inner: usize, rings: usize) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let mut p = Vec::new();
    let mut tris = Vec::new();
    let mut prev: Vec<usize> = Vec::new();
    for r in inner..=inner + rings {
        let count = (TAU * r as f64).round() as usize;
        let start = p.len();
        p.extend(ring(r as f64, count));
        let cur: Vec<usize> = (start..start + count).collect();
        if r > inner {
            zip_rings(&prev, &cur, &mut tris);
        }
        prev = cur;
    }
    (p, tris)
}

/// Half-twisted strip. Column `segments` coincides with column 0 flipped
/// across the strip, but the two are separate vertices.
fn moebius(rows: usize, segments: usize) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let width = rows as f64;
    let radius = segments as f64 / TAU;
    let mut p = Vec::new();
    for i in 0..=segments {
        let u = TAU * i as f64 / segments as f64;
        for j in 0..=rows {
            let v = j as f64 - 0.5 * width;
            let r = radius + v * (0.5 * u).cos();
            p.push(Vec3::new(r * u.cos(), r * u.sin(), v * (0.5 * u).sin()));
        }
    }
    let id = |i: usize, j: usize| i * (rows + 1) + j;
    let mut tris = Vec::new();
    for i in 0..segments {
        for j in 0..rows {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            } else {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            }
        }
    }
    (p, tris)
}

/// Torus lattice with alternate rows shifted half a segment, minus the
/// faces around the vertices within `hole_rings - 1` rings of one vertex.
fn punctured_torus(tube: usize, around: usize, hole_rings: usize) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let r = tube as f64 / TAU;
    let big = around as f64 / TAU;
    let id = |i: usize, j: usize| (i % around) * tube + (j % tube);
    let mut p = Vec::with_capacity(around * tube);
    for i in 0..around {
        let u = TAU * i as f64 / around as f64;
        for j in 0..tube {
            let w = TAU * (j as f64 + 0.5 * (i % 2) as f64) / tube as f64;
            let rr = big + r * w.cos();
            p.push(Vec3::new(rr * u.cos(), rr * u.sin(), r * w.sin()));
        }
    }
    let mut tris = Vec::with_capacity(2 * around * tube);
    for i in 0..around {
        for j in 0..tube {
            let (a, b) = (id(i, j), id(i + 1, j));
            let (c, d) = (id(i, j + 1), id(i + 1, j + 1));
            if i % 2 == 0 {
                tris.push([a, b, c]);
                tris.push([b, d, c]);
            } else {
                tris.push([a, b, d]);
                tris.push([a, d, c]);
            }
        }
    }
    let mut hole = vec![false; p.len()];
    hole[id(around / 2, 0)] = true;
    for _ in 1..hole_rings {
        let frontier = hole.clone();
        for t in tris.iter().filter(|t| t.iter().any(|&v| frontier[v])) {
            t.iter().for_each(|&v| hole[v] = true);
        }
    }
    tris.retain(|t| !t.iter().any(|&v| hole[v]));
    compact(&p, tris)
}

/// Drops unreferenced points and renumbers the rest in order.
fn compact(p: &[Vec3], tris: Vec<[usize; 3]>) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let mut used = vec![false; p.len()];
    tris.iter().flatten().for_each(|&v| used[v] = true);
    let mut remap = vec![usize::MAX; p.len()];
    let mut out = Vec::new();
    for v in 0..p.len() {
        if used[v] {
            remap[v] = out.len();
            out.push(p[v]);
        }
    }
    let tris = tris.into_iter().map(|t| t.map(|v| remap[v])).collect();
    (out, tris)
}
