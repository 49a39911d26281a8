#![allow(dead_code)]

use buckle_core::forces::{bending_forces, integrate, stretch_forces, ForceField, RestState};
use buckle_core::{FaceId, Mesh, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Equilateral triangle grid with `nx × ny` vertices and side `l`.
pub fn equilateral_grid(nx: usize, ny: usize, l: f64) -> Mesh {
    let h = 3f64.sqrt() / 2.0 * l;
    let mut p = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            p.push(Vec3::new((i as f64 + 0.5 * j as f64) * l, j as f64 * h, 0.0));
        }
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut t = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            t.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
            t.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::from_triangles(&p, &t).unwrap()
}

/// Flat hexagonal patch of `rings` lattice rings centered at `offset`.
pub fn hex_patch(rings: i64, l: f64, offset: Vec3) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let h = 3f64.sqrt() / 2.0;
    let inside = |a: i64, b: i64| a.abs().max(b.abs()).max((a + b).abs()) <= rings;
    let mut index = std::collections::HashMap::new();
    let mut p = Vec::new();
    for b in -rings..=rings {
        for a in -rings..=rings {
            if inside(a, b) {
                index.insert((a, b), p.len());
                p.push(offset + Vec3::new((a as f64 + 0.5 * b as f64) * l, b as f64 * h * l, 0.0));
            }
        }
    }
    let mut t = Vec::new();
    for b in -rings..=rings {
        for a in -rings..=rings {
            let get = |x: i64, y: i64| index.get(&(x, y)).copied();
            if let (Some(i), Some(j), Some(k)) = (get(a, b), get(a + 1, b), get(a, b + 1)) {
                t.push([i, j, k]);
            }
            if let (Some(i), Some(j), Some(k)) = (get(a + 1, b), get(a + 1, b + 1), get(a, b + 1)) {
                t.push([i, j, k]);
            }
        }
    }
    (p, t)
}

/// Rectangular `nx × ny` grid with unit spacing, a random diagonal per cell,
/// in-plane jitter of interior vertices and normal noise `z_noise`. Boundary
/// vertices only slide along their side, so the boundary stays convex.
pub fn jittered_grid(r: &mut ChaCha8Rng, nx: usize, ny: usize, jitter: f64, z_noise: f64) -> Mesh {
    let mut p = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let corner_x = i == 0 || i == nx - 1;
            let corner_y = j == 0 || j == ny - 1;
            let mut q = Vec3::new(i as f64, j as f64, 0.0);
            if !corner_x {
                q.x += r.random_range(-jitter..=jitter);
            }
            if !corner_y {
                q.y += r.random_range(-jitter..=jitter);
            }
            if z_noise > 0.0 {
                q.z = r.random_range(-z_noise..=z_noise);
            }
            p.push(q);
        }
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut t = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if r.random_bool(0.5) {
                t.push([a, b, c]);
                t.push([a, c, d]);
            } else {
                t.push([a, b, d]);
                t.push([b, c, d]);
            }
        }
    }
    Mesh::from_triangles(&p, &t).unwrap()
}

/// One explicit step of stretch plus bending; returns the largest displacement.
pub fn shell_step(mesh: &mut Mesh, rest: &RestState, dt: f64) -> f64 {
    let before = mesh.positions().to_vec();
    let mut total = ForceField::for_mesh(mesh);
    total.add(&stretch_forces(mesh, rest).field);
    total.add(&bending_forces(mesh, rest).field);
    integrate(mesh, &total, dt).unwrap();
    mesh.vertices()
        .map(|v| (mesh.position(v) - before[v.idx()]).norm())
        .fold(0.0, f64::max)
}

pub fn mean_edge_deviation(mesh: &Mesh, l0: f64) -> f64 {
    let (sum, n) = mesh.edges().fold((0.0, 0usize), |(s, n), e| (s + (mesh.edge_length(e) - l0).abs(), n + 1));
    sum / n as f64
}

/// Independent segment–triangle test (Möller–Trumbore on a closed segment).
fn segment_hits_triangle(p: Vec3, q: Vec3, t: &[Vec3; 3]) -> bool {
    let dir = q - p;
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < 1e-14 {
        return false;
    }
    let s = p - t[0];
    let u = s.dot(&h) / det;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let qv = s.cross(&e1);
    let v = dir.dot(&qv) / det;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    let w = e2.dot(&qv) / det;
    (0.0..=1.0).contains(&w)
}

/// Two non-coplanar triangles intersect iff an edge of one meets the other.
pub fn brute_triangles_intersect(a: &[Vec3; 3], b: &[Vec3; 3]) -> bool {
    let edges_hit = |x: &[Vec3; 3], y: &[Vec3; 3]| (0..3).any(|k| segment_hits_triangle(x[k], x[(k + 1) % 3], y));
    edges_hit(a, b) || edges_hit(b, a)
}

/// All-pairs count of intersecting faces that share no vertex.
pub fn brute_intersection_count(mesh: &Mesh) -> usize {
    let faces: Vec<FaceId> = mesh.faces().collect();
    let mut count = 0;
    for (k, &f) in faces.iter().enumerate() {
        let vf = mesh.face_vertices(f);
        let tf = vf.map(|v| mesh.position(v));
        for &g in &faces[k + 1..] {
            let vg = mesh.face_vertices(g);
            if vg.iter().any(|v| vf.contains(v)) {
                continue;
            }
            if brute_triangles_intersect(&tf, &vg.map(|v| mesh.position(v))) {
                count += 1;
            }
        }
    }
    count
}

/// Faces of a random triangle soup inside a box of side `extent`.
pub fn triangle_soup(r: &mut ChaCha8Rng, faces: usize, extent: f64, size: f64) -> Mesh {
    let mut p = Vec::new();
    let mut t = Vec::new();
    for k in 0..faces {
        let c = Vec3::new(
            r.random_range(0.0..extent),
            r.random_range(0.0..extent),
            r.random_range(0.0..extent),
        );
        for _ in 0..3 {
            let d = Vec3::new(
                r.random_range(-size..size),
                r.random_range(-size..size),
                r.random_range(-size..size),
            );
            p.push(c + d);
        }
        t.push([3 * k, 3 * k + 1, 3 * k + 2]);
    }
    Mesh::from_triangles(&p, &t).unwrap()
}

/// Rotation about a fixed skew axis followed by a translation.
pub fn rigid(p: Vec3) -> Vec3 {
    rotation() * p + Vec3::new(3.0, -1.5, 0.25)
}

pub fn rotation() -> nalgebra::Rotation3<f64> {
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(Vec3::new(1.0, 2.0, -0.5)), 0.7)
}

pub fn transformed(mesh: &Mesh, f: impl Fn(Vec3) -> Vec3) -> Mesh {
    let mut out = mesh.clone();
    let live: Vec<_> = out.vertices().collect();
    for v in live {
        let p = out.position(v);
        out.set_position(v, f(p));
    }
    out
}

fn counts(m: &Mesh) -> [i64; 3] {
    [m.vertex_count() as i64, m.edge_count() as i64, m.face_count() as i64]
}

/// Applies `ops` random splits, flips, collapses and ear removals to a
/// jittered grid, checking validation and the count deltas of each edit.
/// Returns how many splits, flips, collapses and ear removals went through.
pub fn random_edit_sequence(seed: u64, ops: usize) -> Result<[usize; 4], String> {
    use buckle_core::remesh::split_position;
    use buckle_core::{EdgeId, VertexId};

    let mut r = rng(seed);
    let mut mesh = jittered_grid(&mut r, 5, 5, 0.2, 0.0);
    let chi = |m: &Mesh| m.vertex_count() as i64 - m.edge_count() as i64 + m.face_count() as i64;
    let chi0 = chi(&mesh);
    let mut done = [0usize; 4];
    for step in 0..ops {
        let before = counts(&mesh);
        let edges: Vec<EdgeId> = mesh.edges().collect();
        let e = edges[r.random_range(0..edges.len())];
        let boundary = mesh.is_boundary_edge(e);
        let (kind, delta) = match r.random_range(0..4) {
            0 => {
                let p = split_position(&mesh, e);
                mesh.split_edge(e, p).map_err(|err| format!("split refused: {err}"))?;
                ("split", if boundary { [1, 2, 1] } else { [1, 3, 2] })
            }
            1 => match mesh.flip_edge(e) {
                Ok(_) => ("flip", [0, 0, 0]),
                Err(_) => ("refused flip", [0, 0, 0]),
            },
            2 => match mesh.collapse_edge(e) {
                Ok(_) if boundary => ("collapse", [-1, -2, -1]),
                Ok(_) => ("collapse", [-1, -3, -2]),
                Err(_) => ("refused collapse", [0, 0, 0]),
            },
            _ => {
                let mut verts: Vec<VertexId> = mesh.vertices().filter(|&v| mesh.valence(v) == 2).collect();
                if verts.is_empty() {
                    verts = mesh.vertices().collect();
                }
                let v = verts[r.random_range(0..verts.len())];
                match mesh.remove_vertex(v) {
                    Ok(()) => ("ear", [-1, -2, -1]),
                    Err(_) => ("refused ear", [0, 0, 0]),
                }
            }
        };
        mesh.validate().map_err(|err| format!("step {step} ({kind}): {err}"))?;
        let after = counts(&mesh);
        let got = [after[0] - before[0], after[1] - before[1], after[2] - before[2]];
        if got != delta {
            return Err(format!("step {step} ({kind}): count delta {got:?}, expected {delta:?}"));
        }
        if chi(&mesh) != chi0 {
            return Err(format!("step {step} ({kind}): Euler characteristic changed"));
        }
        if let Some(k) = ["split", "flip", "collapse", "ear"].iter().position(|&n| n == kind) {
            done[k] += 1;
        }
    }
    Ok(done)
}
