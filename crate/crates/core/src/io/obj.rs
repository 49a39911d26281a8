use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::IoError;
use crate::mesh::{Mesh, Vec3};

/// Parses OBJ text. Only `v` and `f` records are read; polygons are fanned
/// from their first corner. Face corners may carry `/vt/vn` suffixes and
/// negative (relative) indices.
pub fn parse_obj(text: &str) -> Result<Mesh, IoError> {
    let mut positions: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut parts = content.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| IoError::Parse { line, message: e.to_string() })?;
                if coords.len() != 3 {
                    return Err(IoError::Parse { line, message: "vertex needs three coordinates".into() });
                }
                positions.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut corners = Vec::new();
                for tok in parts {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head
                        .parse()
                        .map_err(|_| IoError::Parse { line, message: format!("bad face index {tok:?}") })?;
                    let resolved = match i {
                        0 => None,
                        i if i > 0 => Some(i as usize - 1),
                        i => positions.len().checked_sub(i.unsigned_abs() as usize),
                    };
                    let idx = resolved
                        .filter(|&k| k < positions.len())
                        .ok_or_else(|| IoError::Parse { line, message: format!("face index {i} out of range") })?;
                    corners.push(idx);
                }
                if corners.len() < 3 {
                    return Err(IoError::Parse { line, message: "face needs at least three corners".into() });
                }
                for k in 1..corners.len() - 1 {
                    faces.push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(Mesh::from_triangles(&positions, &faces)?)
}

pub fn load_obj(path: &Path) -> Result<Mesh, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_obj(&text)
}

/// Renders live vertices in handle order with 9 significant digits and
/// faces with 1-based indices into that order.
pub fn to_obj_string(mesh: &Mesh) -> String {
    let mut slot = vec![usize::MAX; mesh.vertex_capacity()];
    let mut out = String::with_capacity(40 * (mesh.vertex_count() + mesh.face_count()));
    for (k, v) in mesh.vertices().enumerate() {
        slot[v.idx()] = k + 1;
        let p = mesh.position(v);
        let _ = writeln!(out, "v {} {} {}", sig9(p.x), sig9(p.y), sig9(p.z));
    }
    for f in mesh.faces() {
        let [a, b, c] = mesh.face_vertices(f);
        let _ = writeln!(out, "f {} {} {}", slot[a.idx()], slot[b.idx()], slot[c.idx()]);
    }
    out
}

pub fn save_obj(mesh: &Mesh, path: &Path) -> Result<(), IoError> {
    fs::write(path, to_obj_string(mesh)).map_err(|e| IoError::io(path, e))
}

/// Nine significant digits, shortest exact form of the rounded value.
fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (3, 1));
    }

    #[test]
    fn quad_is_fanned() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        let tris: Vec<[u32; 3]> = m.triangles().iter().map(|t| t.map(|v| v.0)).collect();
        assert_eq!(tris, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn slashes_and_negative_indices() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf -3//1 -2//1 -1//1\n").unwrap();
        assert_eq!(m.face_count(), 1);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        match parse_obj("v 0 0 0\nv 1 zero 0\n") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_round_trip() {
        let text = to_obj_string(&Mesh::new());
        assert_eq!(text, "");
        assert!(parse_obj(&text).unwrap().is_empty());
    }

    #[test]
    fn nine_digits() {
        assert_eq!(sig9(0.1234567891234), "0.123456789");
        assert_eq!(sig9(-12345.678912), "-12345.6789");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(1e-20), "0.00000000000000000001");
    }
}
