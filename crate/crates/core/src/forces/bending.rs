//! Discrete-shells hinge bending.
//!
//! Each interior edge contributes `k_b · w_e · θ_e²` with flat rest angle,
//! where `w_e = ‖e‖ / h_e` and `h_e` is a third of the mean height of the two
//! incident triangles over the edge. Since `h_e = (A₁ + A₂) / (3‖e‖)`, the
//! weight is `3‖e‖² / (A₁ + A₂)`.
//!
//! ```text
//!          c
//!         / \
//!        / 1 \
//!      a ───── b      edge a → b, face 1 = (a, b, c), face 2 = (b, a, d)
//!        \ 2 /
//!         \ /
//!          d
//! ```

use super::{Assembled, ForceField, RestState};
use crate::mesh::{hinge_angle, Mesh, Vec3};

/// Where the hinge weight `‖e‖ / h_e` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BendingWeight {
    /// Equilateral rest triangles of side `L0`: the weight is the constant `2√3`.
    Rest,
    /// Current edge length and face areas; differentiated along with the angle.
    Current,
}

const REST_WEIGHT: f64 = 2.0 * 1.732_050_807_568_877_2;

struct Hinge {
    energy: f64,
    grad: [Vec3; 4],
}

/// Energy and gradient of one hinge, or `None` when a wing is degenerate.
fn hinge(a: Vec3, b: Vec3, c: Vec3, d: Vec3, weight: BendingWeight, eps_area: f64) -> Option<Hinge> {
    let e = b - a;
    let e2 = e.norm_squared();
    let len = e2.sqrt();
    let n1 = e.cross(&(c - a));
    let n2 = (a - b).cross(&(d - b));
    let (n1_len, n2_len) = (n1.norm(), n2.norm());
    let (area1, area2) = (0.5 * n1_len, 0.5 * n2_len);
    if area1 <= eps_area || area2 <= eps_area || len == 0.0 {
        return None;
    }
    let theta = hinge_angle(a, b, c, d);

    // dθ: wings move along their face normals, edge ends take the balancing share.
    let gc = n1 * (len / (n1_len * n1_len));
    let gd = n2 * (len / (n2_len * n2_len));
    let tc = (c - a).dot(&e) / e2;
    let td = (d - a).dot(&e) / e2;
    let ga = -(1.0 - tc) * gc - (1.0 - td) * gd;
    let gb = -tc * gc - td * gd;
    let dtheta = [ga, gb, gc, gd];

    match weight {
        BendingWeight::Rest => {
            let w = REST_WEIGHT;
            Some(Hinge {
                energy: w * theta * theta,
                grad: dtheta.map(|g| 2.0 * w * theta * g),
            })
        }
        BendingWeight::Current => {
            let area = area1 + area2;
            let w = 3.0 * e2 / area;
            let u1 = n1 / n1_len;
            let u2 = n2 / n2_len;
            // dA for face 1 = (a, b, c) and face 2 = (b, a, d).
            let da1 = [
                0.5 * u1.cross(&(c - b)),
                0.5 * u1.cross(&(a - c)),
                0.5 * u1.cross(&(b - a)),
            ];
            let da2 = [
                0.5 * u2.cross(&(d - a)),
                0.5 * u2.cross(&(b - d)),
                0.5 * u2.cross(&(a - b)),
            ];
            // Indices: a=0, b=1, c=2, d=3.
            let darea = [da1[0] + da2[1], da1[1] + da2[0], da1[2], da2[2]];
            let de2 = [-2.0 * e, 2.0 * e, Vec3::zeros(), Vec3::zeros()];
            let mut grad = [Vec3::zeros(); 4];
            for k in 0..4 {
                let dw = 3.0 * (de2[k] * area - e2 * darea[k]) / (area * area);
                grad[k] = 2.0 * w * theta * dtheta[k] + theta * theta * dw;
            }
            Some(Hinge {
                energy: w * theta * theta,
                grad,
            })
        }
    }
}

/// Total hinge energy; degenerate hinges contribute nothing.
pub fn bending_energy(mesh: &Mesh, rest: &RestState) -> f64 {
    let mut total = 0.0;
    for e in mesh.edges() {
        let Ok(vs) = mesh.hinge(e) else { continue };
        let p = vs.map(|v| mesh.position(v));
        if let Some(h) = hinge(p[0], p[1], p[2], p[3], rest.bending_weight, rest.eps_area()) {
            total += h.energy;
        }
    }
    rest.bending_coefficient * total
}

/// Negative gradient of [`bending_energy`]. Degenerate hinges are skipped and
/// listed.
pub fn bending_forces(mesh: &Mesh, rest: &RestState) -> Assembled {
    let mut field = ForceField::for_mesh(mesh);
    let mut skipped = Vec::new();
    if rest.bending_coefficient == 0.0 {
        return Assembled { field, skipped };
    }
    for e in mesh.edges() {
        let Ok(vs) = mesh.hinge(e) else { continue };
        let p = vs.map(|v| mesh.position(v));
        match hinge(p[0], p[1], p[2], p[3], rest.bending_weight, rest.eps_area()) {
            Some(h) => {
                for (v, g) in vs.iter().zip(h.grad) {
                    field.forces[v.idx()] -= rest.bending_coefficient * g;
                }
            }
            None => skipped.push(e),
        }
    }
    Assembled { field, skipped }
}
