//! Step pipeline and run loop.

use std::time::Instant;

use thiserror::Error;

use crate::analysis::{detect_failure, metrics, MetricsReport};
use crate::collision::{
    build_colliders, corrective_collision, growth_collision, CollisionParams, GrowthCollisionParams,
};
use crate::fairing::{smooth_boundary, smooth_interior, smooth_subset, FaceWeight, FairingParams};
use crate::forces::{
    bending_forces, external_forces, integrate, stretch_forces, BendingWeight, ExternalForceSpec, ForceField,
    RestState,
};
use crate::growth::{compute_growth_field, select_sources, GrowthField, GrowthParams, SourcePolicy};
use crate::mesh::{Mesh, VertexId};
use crate::remesh::{collapse_pass, delaunay_flip_pass, ear_removal_pass, subdivide_pass, SplitRule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("bending schedule has k_min {k_min} above k_max {k_max}")]
    InvalidSchedule { k_min: f64, k_max: f64 },
    #[error("step {step} failed: {reason}")]
    StepFailure { step: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Shell,
    /// Spherical growth collision replaces stretch and bending.
    CollisionVariant,
}

/// Linear ramp of the bending coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendingSchedule {
    pub k_min: f64,
    pub k_max: f64,
    pub ramp_steps: usize,
}

impl Default for BendingSchedule {
    fn default() -> Self {
        Self {
            k_min: 5e-3,
            k_max: 3e-2,
            ramp_steps: 50,
        }
    }
}

pub fn bending_coefficient(schedule: &BendingSchedule, step: usize) -> Result<f64, SimError> {
    let BendingSchedule { k_min, k_max, ramp_steps } = *schedule;
    if !(k_min <= k_max) || k_min < 0.0 {
        return Err(SimError::InvalidSchedule { k_min, k_max });
    }
    if step >= ramp_steps {
        return Ok(k_max);
    }
    let t = step as f64 / ramp_steps as f64;
    Ok(k_min + (k_max - k_min) * t)
}

/// Source selection as configured; the seeded subset uses the run seed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SourceChoice {
    #[default]
    AllBoundary,
    RandomBoundarySubset(usize),
    Explicit(Vec<VertexId>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub method: Method,
    pub growth: GrowthParams,
    pub sources: SourceChoice,
    pub split: SplitRule,
    /// Collapse threshold as a multiple of `L0`.
    pub collapse_factor: f64,
    pub stretch_stiffness: f64,
    pub bending: BendingSchedule,
    pub bending_weight: BendingWeight,
    pub alpha: f64,
    pub beta: f64,
    /// Fairing tolerance as a multiple of `L0²`.
    pub fairing_tolerance: f64,
    pub fairing_weight: FaceWeight,
    pub normal_factor: f64,
    pub tangent_factor: f64,
    pub collision: CollisionParams,
    pub growth_collision: GrowthCollisionParams,
    pub external: ExternalForceSpec,
    pub dt: f64,
    pub max_steps: usize,
    pub max_vertices: usize,
    pub export_every: usize,
    pub seed: u64,
    /// Record wall time in reports; off keeps outputs byte-reproducible.
    pub record_timing: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            method: Method::Shell,
            growth: GrowthParams::default(),
            sources: SourceChoice::AllBoundary,
            split: SplitRule::default(),
            collapse_factor: 0.2,
            stretch_stiffness: 2.0,
            bending: BendingSchedule::default(),
            bending_weight: BendingWeight::Current,
            alpha: 0.75,
            beta: 0.1,
            fairing_tolerance: 1e-8,
            fairing_weight: FaceWeight::Area,
            normal_factor: 0.25,
            tangent_factor: 0.9,
            collision: CollisionParams::default(),
            growth_collision: GrowthCollisionParams::default(),
            external: ExternalForceSpec::default(),
            dt: 0.01,
            max_steps: 2000,
            max_vertices: 3000,
            export_every: 10,
            seed: 0,
            record_timing: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        self.growth.validate().map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        bending_coefficient(&self.bending, 0)?;
        if !(self.split.k > 0.0) {
            return bad("k_split must be positive");
        }
        if !(self.collapse_factor >= 0.0) {
            return bad("collapse_factor must be non-negative");
        }
        if !(self.stretch_stiffness > 0.0) {
            return bad("stretch_stiffness must be positive");
        }
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.beta) {
            return bad("alpha and beta must lie in [0, 1]");
        }
        if !(self.fairing_tolerance >= 0.0) {
            return bad("fairing_tolerance must be non-negative");
        }
        if !(self.normal_factor > 0.0 && self.tangent_factor > 0.0) {
            return bad("collider factors must be positive");
        }
        if !(self.collision.stiffness >= 0.0) || !(0.0..=1.0).contains(&self.collision.smoothing) {
            return bad("collision stiffness must be non-negative and smoothing in [0, 1]");
        }
        if !(self.growth_collision.stiffness >= 0.0) || !(0.0..=1.0).contains(&self.growth_collision.g_min) {
            return bad("growth collision stiffness must be non-negative and g_min in [0, 1]");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if self.export_every == 0 {
            return bad("export_every must be at least 1");
        }
        Ok(())
    }

    pub fn fairing(&self, l0: f64) -> FairingParams {
        FairingParams {
            alpha: self.alpha,
            beta: self.beta,
            tolerance: self.fairing_tolerance * l0 * l0,
            eps_area: 1e-12 * l0 * l0,
            weight: self.fairing_weight,
        }
    }

    fn source_policy(&self) -> SourcePolicy {
        match &self.sources {
            SourceChoice::AllBoundary => SourcePolicy::AllBoundary,
            SourceChoice::RandomBoundarySubset(count) => SourcePolicy::RandomBoundarySubset {
                count: *count,
                seed: self.seed,
            },
            SourceChoice::Explicit(v) => SourcePolicy::Explicit(v.clone()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    /// Index of the step, counting from 1.
    pub step: usize,
    pub splits: usize,
    pub flips: usize,
    pub collapses: usize,
    pub collapse_refusals: usize,
    pub ears: usize,
    pub collision_events: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub k_b: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub mesh: Mesh,
    rest: RestState,
    /// Steps completed so far.
    pub step: usize,
    pub reports: Vec<StepReport>,
    pub growth: GrowthField,
    /// Sources fixed at start for the non-boundary policies.
    fixed_sources: Option<Vec<VertexId>>,
}

impl SimState {
    /// Fixes the rest length from the initial mesh.
    pub fn new(mesh: Mesh, config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        if mesh.face_count() == 0 {
            return Err(SimError::InvalidConfig("initial mesh has no faces".into()));
        }
        let k0 = bending_coefficient(&config.bending, 0)?;
        let mut rest = RestState::from_mesh(&mesh, config.stretch_stiffness, k0)
            .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        rest.bending_weight = config.bending_weight;
        let fixed_sources = match config.sources {
            SourceChoice::AllBoundary => None,
            _ => Some(
                select_sources(&mesh, &config.source_policy())
                    .map_err(|e| SimError::InvalidConfig(e.to_string()))?
                    .vertices,
            ),
        };
        let growth = GrowthField::uniform(&mesh, 0.0);
        Ok(Self {
            mesh,
            rest,
            step: 0,
            reports: Vec::new(),
            growth,
            fixed_sources,
        })
    }

    pub fn rest(&self) -> &RestState {
        &self.rest
    }

    pub fn rest_length(&self) -> f64 {
        self.rest.rest_length
    }
}

/// Advances the state by one step. On error the state holds the failing
/// configuration.
pub fn step(state: &mut SimState, config: &SimConfig) -> Result<StepReport, SimError> {
    let started = Instant::now();
    let index = state.step + 1;
    let fail = |reason: String| SimError::StepFailure { step: index, reason };
    let l0 = state.rest.rest_length;
    let mut report = StepReport {
        step: index,
        ..Default::default()
    };

    // Connectivity.
    report.flips = delaunay_flip_pass(&mut state.mesh);
    let stats = collapse_pass(&mut state.mesh, config.collapse_factor * l0);
    report.collapses = stats.collapsed;
    report.collapse_refusals = stats.refused;
    report.ears = ear_removal_pass(&mut state.mesh);

    // Growth factors and subdivision.
    let policy = match &state.fixed_sources {
        None => SourcePolicy::AllBoundary,
        Some(list) => {
            let alive: Vec<VertexId> = list.iter().copied().filter(|&v| state.mesh.vertex_alive(v)).collect();
            SourcePolicy::Explicit(alive)
        }
    };
    state.growth = compute_growth_field(&state.mesh, &policy, &config.growth).map_err(|e| fail(e.to_string()))?;
    report.splits = subdivide_pass(&mut state.mesh, &mut state.growth, &state.rest, &config.split);

    // Forces.
    report.k_b = bending_coefficient(&config.bending, state.step)?;
    state.rest.bending_coefficient = report.k_b;
    let mut total = external_forces(&state.mesh, &state.growth, &config.external);
    match config.method {
        Method::Shell => {
            total.add(&stretch_forces(&state.mesh, &state.rest).field);
            total.add(&bending_forces(&state.mesh, &state.rest).field);
        }
        Method::CollisionVariant => {
            let out = growth_collision(&state.mesh, &state.rest, &state.growth, &config.growth_collision)
                .map_err(|e| fail(e.to_string()))?;
            total.add(&out.field);
        }
    }
    integrate(&mut state.mesh, &total, config.dt).map_err(|e| fail(e.to_string()))?;

    // Fairing.
    let fairing = config.fairing(l0);
    smooth_interior(&mut state.mesh, &fairing);
    smooth_boundary(&mut state.mesh, &fairing).map_err(|e| fail(e.to_string()))?;

    // Corrective collision, then fairing of untouched neighbors.
    let colliders = build_colliders(&state.mesh, l0, config.normal_factor, config.tangent_factor)
        .map_err(|e| fail(e.to_string()))?;
    let outcome = corrective_collision(&state.mesh, &colliders, &config.collision);
    report.collision_events = outcome.events();
    if !outcome.involved.is_empty() {
        apply_displacements(&mut state.mesh, &outcome.forces);
        let neighbors = uninvolved_neighbors(&state.mesh, &outcome.involved);
        smooth_subset(&mut state.mesh, &neighbors, &fairing).map_err(|e| fail(e.to_string()))?;
    }

    state.step = index;
    if let Some(reason) = detect_failure(&state.mesh, l0) {
        return Err(fail(reason.to_string()));
    }
    report.vertices = state.mesh.vertex_count();
    report.edges = state.mesh.edge_count();
    report.faces = state.mesh.face_count();
    if config.record_timing {
        report.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    }
    state.reports.push(report.clone());
    Ok(report)
}

fn apply_displacements(mesh: &mut Mesh, field: &ForceField) {
    let live: Vec<VertexId> = mesh.vertices().collect();
    for v in live {
        let p = mesh.position(v) + field.forces[v.idx()];
        mesh.set_position(v, p);
    }
}

/// 1-ring neighbors of `involved` that are not themselves involved, sorted.
pub fn uninvolved_neighbors(mesh: &Mesh, involved: &[VertexId]) -> Vec<VertexId> {
    let mut out: Vec<VertexId> = involved
        .iter()
        .flat_map(|&v| mesh.neighbors(v))
        .filter(|u| involved.binary_search(u).is_err())
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    VertexBudget,
    StepBudget,
    Failure(String),
}

impl StopReason {
    pub fn tag(&self) -> &'static str {
        match self {
            StopReason::VertexBudget => "vertex budget",
            StopReason::StepBudget => "step budget",
            StopReason::Failure(_) => "failure",
        }
    }
}

/// One exported frame as handed to a sink.
pub struct Frame<'a> {
    pub step: usize,
    pub mesh: &'a Mesh,
    /// Report of the step that produced the frame; `None` for the initial frame.
    pub report: Option<&'a StepReport>,
    pub metrics: &'a MetricsReport,
}

/// Receives frames and per-step reports during a run.
pub trait FrameSink {
    type Error;

    fn frame(&mut self, frame: &Frame<'_>) -> Result<(), Self::Error>;

    fn step(&mut self, _report: &StepReport) -> Result<(), Self::Error> {
        Ok(())
    }

    fn failure(&mut self, _step: usize, _reason: &str) -> Result<(), Self::Error> {
        Ok(())
    }
}

/// Sink that keeps frame metrics in memory.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub frames: Vec<(usize, MetricsReport)>,
}

impl FrameSink for MemorySink {
    type Error = std::convert::Infallible;

    fn frame(&mut self, frame: &Frame<'_>) -> Result<(), Self::Error> {
        self.frames.push((frame.step, frame.metrics.clone()));
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub mesh: Mesh,
    pub rest_length: f64,
    pub reports: Vec<StepReport>,
    /// Metrics of every exported frame.
    pub frames: Vec<(usize, MetricsReport)>,
    pub stop: StopReason,
}

#[derive(Debug, Error)]
pub enum RunError<E> {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("frame sink failed")]
    Sink(E),
}

/// Steps until the vertex budget, the step budget or a failure. Frames are
/// exported at step 0, every `export_every` steps and at the stop; a failing
/// run also exports the last valid frame.
pub fn run<S: FrameSink>(mesh: Mesh, config: &SimConfig, sink: &mut S) -> Result<RunResult, RunError<S::Error>> {
    let mut state = SimState::new(mesh, config)?;
    let l0 = state.rest_length();
    let mut frames = Vec::new();
    let mut last_exported = 0usize;
    export(sink, &mut frames, &state.mesh, 0, None, l0)?;
    let stop = loop {
        if state.mesh.vertex_count() >= config.max_vertices {
            break StopReason::VertexBudget;
        }
        if state.step >= config.max_steps {
            break StopReason::StepBudget;
        }
        let previous = (state.step, state.mesh.clone());
        match step(&mut state, config) {
            Ok(report) => {
                sink.step(&report).map_err(RunError::Sink)?;
                let reached = state.mesh.vertex_count() >= config.max_vertices || state.step >= config.max_steps;
                if state.step % config.export_every == 0 || reached {
                    export(sink, &mut frames, &state.mesh, state.step, Some(&report), l0)?;
                    last_exported = state.step;
                }
            }
            Err(SimError::StepFailure { step, reason }) => {
                sink.failure(step, &reason).map_err(RunError::Sink)?;
                if previous.0 != last_exported {
                    export(sink, &mut frames, &previous.1, previous.0, state.reports.last(), l0)?;
                }
                export(sink, &mut frames, &state.mesh, step, None, l0)?;
                break StopReason::Failure(reason);
            }
            Err(e) => return Err(e.into()),
        }
    };
    Ok(RunResult {
        mesh: state.mesh,
        rest_length: l0,
        reports: state.reports,
        frames,
        stop,
    })
}

fn export<S: FrameSink>(
    sink: &mut S,
    frames: &mut Vec<(usize, MetricsReport)>,
    mesh: &Mesh,
    step: usize,
    report: Option<&StepReport>,
    l0: f64,
) -> Result<(), RunError<S::Error>> {
    let m = metrics(mesh, l0);
    sink.frame(&Frame {
        step,
        mesh,
        report,
        metrics: &m,
    })
    .map_err(RunError::Sink)?;
    frames.push((step, m));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_ramp() {
        let s = BendingSchedule::default();
        assert_eq!(bending_coefficient(&s, 0).unwrap(), 5e-3);
        assert_eq!(bending_coefficient(&s, 50).unwrap(), 3e-2);
        assert_eq!(bending_coefficient(&s, 500).unwrap(), 3e-2);
        assert!((bending_coefficient(&s, 25).unwrap() - 0.5 * (5e-3 + 3e-2)).abs() < 1e-15);
        let bad = BendingSchedule {
            k_min: 0.1,
            k_max: 0.01,
            ramp_steps: 10,
        };
        assert!(matches!(bending_coefficient(&bad, 0), Err(SimError::InvalidSchedule { .. })));
        let flat = BendingSchedule {
            ramp_steps: 0,
            ..s
        };
        assert_eq!(bending_coefficient(&flat, 0).unwrap(), 3e-2);
    }
}
