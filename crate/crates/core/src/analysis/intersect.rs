//! Triangle–triangle intersection with a touching tolerance.
//!
//! Two non-coplanar triangles intersect in a segment whose endpoints lie on
//! edges of one triangle or the other, so testing the six edges against the
//! opposite triangle is enough. Contacts closer than `tol` to a plane or to
//! a triangle edge count as touching and are ignored.

use crate::mesh::Vec3;

fn signed_distance(p: Vec3, origin: Vec3, unit_normal: Vec3) -> f64 {
    (p - origin).dot(&unit_normal)
}

/// Whether `p` (in the triangle's plane) is inside it by more than `tol`.
fn strictly_inside(p: Vec3, tri: &[Vec3; 3], unit_normal: Vec3, tol: f64) -> bool {
    (0..3).all(|k| {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        let edge = b - a;
        let len = edge.norm();
        len > 0.0 && edge.cross(&(p - a)).dot(&unit_normal) / len > tol
    })
}

/// Segment `p q` properly crosses the interior of `tri`.
pub fn segment_pierces(p: Vec3, q: Vec3, tri: &[Vec3; 3], tol: f64) -> bool {
    let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
    let len = n.norm();
    if len == 0.0 {
        return false;
    }
    let n = n / len;
    let dp = signed_distance(p, tri[0], n);
    let dq = signed_distance(q, tri[0], n);
    if !((dp > tol && dq < -tol) || (dp < -tol && dq > tol)) {
        return false;
    }
    let x = p + (q - p) * (dp / (dp - dq));
    strictly_inside(x, tri, n, tol)
}

fn coplanar(a: &[Vec3; 3], b: &[Vec3; 3], tol: f64) -> bool {
    let n = (a[1] - a[0]).cross(&(a[2] - a[0]));
    let len = n.norm();
    if len == 0.0 {
        return false;
    }
    let n = n / len;
    b.iter().all(|&p| signed_distance(p, a[0], n).abs() <= tol)
}

/// 2D proper crossing of segments in the plane with unit normal `n`.
fn segments_cross(a: Vec3, b: Vec3, c: Vec3, d: Vec3, n: Vec3, tol: f64) -> bool {
    let side = |p: Vec3, q: Vec3, r: Vec3| {
        let e = q - p;
        let l = e.norm();
        if l == 0.0 {
            0.0
        } else {
            e.cross(&(r - p)).dot(&n) / l
        }
    };
    let s1 = side(a, b, c);
    let s2 = side(a, b, d);
    let s3 = side(c, d, a);
    let s4 = side(c, d, b);
    ((s1 > tol && s2 < -tol) || (s1 < -tol && s2 > tol)) && ((s3 > tol && s4 < -tol) || (s3 < -tol && s4 > tol))
}

fn coplanar_overlap(a: &[Vec3; 3], b: &[Vec3; 3], tol: f64) -> bool {
    let n = (a[1] - a[0]).cross(&(a[2] - a[0])).normalize();
    for i in 0..3 {
        for j in 0..3 {
            if segments_cross(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3], n, tol) {
                return true;
            }
        }
    }
    let nb = (b[1] - b[0]).cross(&(b[2] - b[0]));
    let nb = if nb.dot(&n) < 0.0 { -n } else { n };
    let na = n;
    let centroid = |t: &[Vec3; 3]| (t[0] + t[1] + t[2]) / 3.0;
    // Containment: some point of one lies strictly inside the other.
    strictly_inside(centroid(a), b, nb, tol)
        || strictly_inside(centroid(b), a, na, tol)
        || a.iter().any(|&p| strictly_inside(p, b, nb, tol))
        || b.iter().any(|&p| strictly_inside(p, a, na, tol))
}

/// Whether triangles `a` and `b` intersect by more than touching.
pub fn triangles_intersect(a: &[Vec3; 3], b: &[Vec3; 3], tol: f64) -> bool {
    if coplanar(a, b, tol) && coplanar(b, a, tol) {
        return coplanar_overlap(a, b, tol);
    }
    (0..3).any(|k| segment_pierces(a[k], a[(k + 1) % 3], b, tol))
        || (0..3).any(|k| segment_pierces(b[k], b[(k + 1) % 3], a, tol))
}
