//! Run directory layout: `config.echo`, `frames/frame_NNNNNN.obj`,
//! `metrics.csv` and `log.txt`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{config::to_config_string, obj::save_obj, IoError};
use crate::analysis::MetricsReport;
use crate::sim::{bending_coefficient, Frame, FrameSink, RunResult, SimConfig, StepReport};

pub const METRICS_HEADER: &str = "step,V,E,F,splits,flips,collapses,ears,collision_events,mean_quality,mean_valence,mean_sq_dihedral,self_intersections,k_b,wall_ms";

/// One CSV row. Counts come from the step report (zero for the initial frame).
pub fn metrics_row(step: usize, report: Option<&StepReport>, m: &MetricsReport, k_b: f64) -> String {
    let d = StepReport::default();
    let r = report.unwrap_or(&d);
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        step,
        m.vertices,
        m.edges,
        m.faces,
        r.splits,
        r.flips,
        r.collapses,
        r.ears,
        r.collision_events,
        m.mean_quality,
        m.mean_valence,
        m.mean_sq_dihedral,
        m.self_intersections,
        report.map_or(k_b, |r| r.k_b),
        if r.wall_ms == 0.0 { "0".to_string() } else { format!("{:.3}", r.wall_ms) },
    )
}

pub struct RunDirectory {
    root: PathBuf,
    metrics: BufWriter<File>,
    log: BufWriter<File>,
    initial_k_b: f64,
}

impl RunDirectory {
    /// Creates the layout under `root` and writes the config echo.
    pub fn create(root: &Path, config: &SimConfig) -> Result<Self, IoError> {
        let frames = root.join("frames");
        fs::create_dir_all(&frames).map_err(|e| IoError::io(&frames, e))?;
        let echo = root.join("config.echo");
        fs::write(&echo, to_config_string(config)).map_err(|e| IoError::io(&echo, e))?;
        let open = |name: &str| {
            let p = root.join(name);
            File::create(&p).map(BufWriter::new).map_err(|e| IoError::io(&p, e))
        };
        let mut metrics = open("metrics.csv")?;
        writeln!(metrics, "{METRICS_HEADER}").map_err(|e| IoError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            metrics,
            log: open("log.txt")?,
            initial_k_b: bending_coefficient(&config.bending, 0).unwrap_or(config.bending.k_min),
        })
    }

    pub fn frame_path(&self, step: usize) -> PathBuf {
        self.root.join("frames").join(format!("frame_{step:06}.obj"))
    }

    pub fn log_line(&mut self, line: &str) -> Result<(), IoError> {
        writeln!(self.log, "{line}").map_err(|e| IoError::io(&self.root, e))
    }

    /// Writes the stop line and flushes everything.
    pub fn finish(mut self, result: &RunResult) -> Result<(), IoError> {
        let line = match &result.stop {
            crate::sim::StopReason::Failure(reason) => format!("stop: failure ({reason})"),
            other => format!("stop: {}", other.tag()),
        };
        self.log_line(&line)?;
        self.metrics.flush().map_err(|e| IoError::io(&self.root, e))?;
        self.log.flush().map_err(|e| IoError::io(&self.root, e))
    }
}

impl FrameSink for RunDirectory {
    type Error = IoError;

    fn frame(&mut self, frame: &Frame<'_>) -> Result<(), IoError> {
        save_obj(frame.mesh, &self.frame_path(frame.step))?;
        let row = metrics_row(frame.step, frame.report, frame.metrics, self.initial_k_b);
        writeln!(self.metrics, "{row}").map_err(|e| IoError::io(&self.root, e))
    }

    fn step(&mut self, r: &StepReport) -> Result<(), IoError> {
        let line = format!(
            "step {} V={} E={} F={} splits={} flips={} collapses={} refused={} ears={} collisions={} k_b={}",
            r.step,
            r.vertices,
            r.edges,
            r.faces,
            r.splits,
            r.flips,
            r.collapses,
            r.collapse_refusals,
            r.ears,
            r.collision_events,
            r.k_b
        );
        self.log_line(&line)
    }

    fn failure(&mut self, step: usize, reason: &str) -> Result<(), IoError> {
        self.log_line(&format!("step {step} failed: {reason}"))
    }
}
