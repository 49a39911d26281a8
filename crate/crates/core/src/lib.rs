//! Differential growth of open triangle surfaces.
//!
//! A surface grows by splitting edges where a growth field is high, is
//! relaxed by stretch and hinge-bending forces, kept well shaped by local
//! remeshing and circumcenter fairing, and kept free of self-intersections
//! by a corrective ellipsoidal collision pass.

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod collision;
pub mod fairing;
pub mod forces;
pub mod growth;
pub mod io;
pub mod mesh;
pub mod remesh;
pub mod sim;

pub use mesh::{EdgeId, FaceId, HalfedgeId, Mesh, Vec3, VertexId};
