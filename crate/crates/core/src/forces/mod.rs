//! Shell forces and overdamped integration.

mod bending;

pub use bending::{bending_energy, bending_forces, BendingWeight};

use thiserror::Error;

use crate::growth::GrowthField;
use crate::mesh::{EdgeId, Mesh, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForceError {
    #[error("non-finite force on vertex slot {0}")]
    NonFiniteForce(usize),
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("invalid rest state: {0}")]
    InvalidRest(&'static str),
}

/// Rest configuration the shell relaxes toward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestState {
    /// Target edge length, fixed at initialization.
    pub rest_length: f64,
    pub stretch_stiffness: f64,
    pub bending_coefficient: f64,
    /// Area of an equilateral triangle with side `rest_length`. Recorded only.
    pub rest_area: f64,
    pub bending_weight: BendingWeight,
}

impl RestState {
    pub fn new(rest_length: f64, stretch_stiffness: f64, bending_coefficient: f64) -> Result<Self, ForceError> {
        if !(rest_length > 0.0 && rest_length.is_finite()) {
            return Err(ForceError::InvalidRest("rest length must be positive"));
        }
        if !(stretch_stiffness > 0.0) {
            return Err(ForceError::InvalidRest("stretch stiffness must be positive"));
        }
        if !(bending_coefficient >= 0.0) {
            return Err(ForceError::InvalidRest("bending coefficient must be non-negative"));
        }
        Ok(Self {
            rest_length,
            stretch_stiffness,
            bending_coefficient,
            rest_area: 3f64.sqrt() / 4.0 * rest_length * rest_length,
            bending_weight: BendingWeight::Current,
        })
    }

    /// Rest state with the rest length taken from the mesh's mean edge length.
    pub fn from_mesh(mesh: &Mesh, stretch_stiffness: f64, bending_coefficient: f64) -> Result<Self, ForceError> {
        Self::new(mesh.mean_edge_length(), stretch_stiffness, bending_coefficient)
    }

    /// Area below which a face counts as degenerate.
    pub fn eps_area(&self) -> f64 {
        1e-12 * self.rest_length * self.rest_length
    }
}

/// Per-vertex forces, indexed by vertex slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    pub forces: Vec<Vec3>,
}

impl ForceField {
    pub fn zeros(n: usize) -> Self {
        Self {
            forces: vec![Vec3::zeros(); n],
        }
    }

    pub fn for_mesh(mesh: &Mesh) -> Self {
        Self::zeros(mesh.vertex_capacity())
    }

    pub fn add(&mut self, other: &ForceField) {
        for (a, b) in self.forces.iter_mut().zip(&other.forces) {
            *a += b;
        }
    }

    pub fn total(&self) -> Vec3 {
        self.forces.iter().fold(Vec3::zeros(), |acc, f| acc + f)
    }

    /// Total torque about the origin.
    pub fn torque(&self, positions: &[Vec3]) -> Vec3 {
        self.forces
            .iter()
            .zip(positions)
            .fold(Vec3::zeros(), |acc, (f, p)| acc + p.cross(f))
    }

    pub fn max_norm(&self) -> f64 {
        self.forces.iter().map(|f| f.norm()).fold(0.0, f64::max)
    }
}

/// A force field together with the elements skipped while assembling it.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembled {
    pub field: ForceField,
    pub skipped: Vec<EdgeId>,
}

/// Hooke springs pulling every edge toward the rest length.
pub fn stretch_forces(mesh: &Mesh, rest: &RestState) -> Assembled {
    let mut field = ForceField::for_mesh(mesh);
    let mut skipped = Vec::new();
    for e in mesh.edges() {
        let (i, j) = mesh.edge_vertices(e);
        match spring_force(mesh.position(i), mesh.position(j), rest.rest_length, rest.stretch_stiffness) {
            Some(f) => {
                field.forces[i.idx()] += f;
                field.forces[j.idx()] -= f;
            }
            None => skipped.push(e),
        }
    }
    Assembled { field, skipped }
}

/// Force on `pi` from a spring to `pj`; the force on `pj` is its negation.
/// `None` for coincident endpoints.
#[inline]
pub fn spring_force(pi: Vec3, pj: Vec3, rest_length: f64, stiffness: f64) -> Option<Vec3> {
    let d = pj - pi;
    let len = d.norm();
    (len > 0.0).then(|| (len - rest_length) * stiffness / len * d)
}

/// How a per-vertex growth factor scales an external force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthWeighting {
    /// Multiply by `g`.
    Growth,
    /// Multiply by `1 − g`.
    InverseGrowth,
    /// Unscaled.
    Constant,
}

impl GrowthWeighting {
    pub fn weight(self, g: f64) -> f64 {
        match self {
            GrowthWeighting::Growth => g,
            GrowthWeighting::InverseGrowth => 1.0 - g,
            GrowthWeighting::Constant => 1.0,
        }
    }
}

/// Gravity and a rotational field about an axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExternalForceSpec {
    pub gravity: Vec3,
    pub gravity_weighting: GrowthWeighting,
    pub rotation_axis: Vec3,
    pub rotation_center: Vec3,
    pub rotation_strength: f64,
    pub rotation_weighting: GrowthWeighting,
}

impl Default for ExternalForceSpec {
    fn default() -> Self {
        Self {
            gravity: Vec3::zeros(),
            gravity_weighting: GrowthWeighting::InverseGrowth,
            rotation_axis: Vec3::z(),
            rotation_center: Vec3::zeros(),
            rotation_strength: 0.0,
            rotation_weighting: GrowthWeighting::Growth,
        }
    }
}

impl ExternalForceSpec {
    pub fn is_zero(&self) -> bool {
        self.gravity == Vec3::zeros() && self.rotation_strength == 0.0
    }
}

pub fn external_forces(mesh: &Mesh, field: &GrowthField, spec: &ExternalForceSpec) -> ForceField {
    let mut out = ForceField::for_mesh(mesh);
    if spec.is_zero() {
        return out;
    }
    let axis = spec.rotation_axis.try_normalize(0.0).unwrap_or_else(Vec3::zeros);
    for v in mesh.vertices() {
        let g = field.g(v);
        let mut f = spec.gravity * spec.gravity_weighting.weight(g);
        if spec.rotation_strength != 0.0 {
            let r = mesh.position(v) - spec.rotation_center;
            f += spec.rotation_strength * spec.rotation_weighting.weight(g) * axis.cross(&r);
        }
        out.forces[v.idx()] = f;
    }
    out
}

/// Overdamped explicit step `x ← x + dt·F`. Nothing moves if any force is
/// non-finite.
pub fn integrate(mesh: &mut Mesh, total: &ForceField, dt: f64) -> Result<(), ForceError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ForceError::InvalidTimeStep(dt));
    }
    let live: Vec<_> = mesh.vertices().collect();
    for &v in &live {
        let f = total.forces[v.idx()];
        if !f.iter().all(|c| c.is_finite()) {
            return Err(ForceError::NonFiniteForce(v.idx()));
        }
    }
    for v in live {
        let p = mesh.position(v) + dt * total.forces[v.idx()];
        mesh.set_position(v, p);
    }
    Ok(())
}
