//! Fixtures shared by the benchmarks.

use buckle_core::io::{generate, GeneratorSpec, SurfaceKind};
use buckle_core::sim::{step, SimConfig, SimState};

/// Simulation state of a default run on a generated surface, stepped until it holds at least
/// `vertices` vertices.
pub fn grown_state(kind: SurfaceKind, vertices: usize) -> (SimState, SimConfig) {
    let config = SimConfig::default();
    let mesh = generate(&GeneratorSpec::new(kind, 0)).expect("generator");
    let mut state = SimState::new(mesh, &config).expect("config");
    while state.mesh.vertex_count() < vertices {
        step(&mut state, &config).expect("step");
    }
    (state, config)
}
