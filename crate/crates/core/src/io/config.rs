//! Flat `key = value` configuration.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::IoError;
use crate::collision::PairEvaluation;
use crate::fairing::FaceWeight;
use crate::forces::{BendingWeight, GrowthWeighting};
use crate::mesh::{Vec3, VertexId};
use crate::remesh::SplitLength;
use crate::sim::{Method, SimConfig, SourceChoice};

pub fn parse_config(path: &Path) -> Result<SimConfig, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_config_str(&text)
}

/// Parses config text on top of the defaults. Later lines win.
pub fn parse_config_str(text: &str) -> Result<SimConfig, IoError> {
    let mut c = SimConfig::default();
    let mut source_count: Option<usize> = None;
    let mut source_vertices: Option<Vec<VertexId>> = None;
    let mut sources_kind: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| IoError::Parse {
            line: lineno + 1,
            message: "expected `key = value`".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let err = || IoError::TypeError {
            key: key.to_string(),
            value: value.to_string(),
        };
        let num = || value.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(err);
        let int = || value.parse::<usize>().map_err(|_| err());
        match key {
            "method" => {
                c.method = match value {
                    "shell" => Method::Shell,
                    "collision" => Method::CollisionVariant,
                    _ => return Err(err()),
                }
            }
            "cutoff" => c.growth.cutoff = num()?,
            "steepness" => c.growth.steepness = num()?,
            "high_at_sources" => c.growth.high_at_sources = value.parse().map_err(|_| err())?,
            "sources" => sources_kind = Some(value.to_string()),
            "source_count" => source_count = Some(int()?),
            "source_vertices" => {
                let list = value
                    .split(|ch: char| ch == ',' || ch.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<u32>().map(VertexId))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err())?;
                source_vertices = Some(list);
            }
            "k_split" => c.split.k = num()?,
            "split_length" => {
                c.split.length = match value {
                    "rest" => SplitLength::Rest,
                    "self" => SplitLength::Current,
                    _ => return Err(err()),
                }
            }
            "collapse_factor" => c.collapse_factor = num()?,
            "stretch_stiffness" => c.stretch_stiffness = num()?,
            "bending_kmin" => c.bending.k_min = num()?,
            "bending_kmax" => c.bending.k_max = num()?,
            "bending_ramp" => c.bending.ramp_steps = int()?,
            "bending_weight" => {
                c.bending_weight = match value {
                    "rest" => BendingWeight::Rest,
                    "current" => BendingWeight::Current,
                    _ => return Err(err()),
                }
            }
            "alpha" => c.alpha = num()?,
            "beta" => c.beta = num()?,
            "fairing_tolerance" => c.fairing_tolerance = num()?,
            "fairing_weight" => {
                c.fairing_weight = match value {
                    "area" => FaceWeight::Area,
                    "circumradius" => FaceWeight::CircumradiusOverArea,
                    _ => return Err(err()),
                }
            }
            "collider_normal_factor" => c.normal_factor = num()?,
            "collider_tangent_factor" => c.tangent_factor = num()?,
            "collision_k" => c.collision.stiffness = num()?,
            "collision_lambda" => c.collision.smoothing = num()?,
            "collision_pairs" => {
                c.collision.evaluation = match value {
                    "lower-handle" => PairEvaluation::LowerHandle,
                    "both-orders" => PairEvaluation::BothOrders,
                    _ => return Err(err()),
                }
            }
            "growth_collision_k" => c.growth_collision.stiffness = num()?,
            "growth_collision_gmin" => c.growth_collision.g_min = num()?,
            "gravity" => c.external.gravity = vec3(value).ok_or_else(err)?,
            "gravity_weighting" => c.external.gravity_weighting = weighting(value).ok_or_else(err)?,
            "rotation_axis" => c.external.rotation_axis = vec3(value).ok_or_else(err)?,
            "rotation_center" => c.external.rotation_center = vec3(value).ok_or_else(err)?,
            "rotation_strength" => c.external.rotation_strength = num()?,
            "rotation_weighting" => c.external.rotation_weighting = weighting(value).ok_or_else(err)?,
            "dt" => c.dt = num()?,
            "max_steps" => c.max_steps = int()?,
            "max_vertices" => c.max_vertices = int()?,
            "export_every" => c.export_every = int()?,
            "seed" => c.seed = u64::from_str(value).map_err(|_| err())?,
            "record_timing" => c.record_timing = value.parse().map_err(|_| err())?,
            _ => return Err(IoError::UnknownKey(key.to_string())),
        }
    }
    let kind = sources_kind.as_deref().unwrap_or(match (&source_vertices, source_count) {
        (Some(_), _) => "explicit",
        (None, Some(_)) => "random-subset",
        _ => "all-boundary",
    });
    c.sources = match kind {
        "all-boundary" => SourceChoice::AllBoundary,
        "random-subset" => SourceChoice::RandomBoundarySubset(source_count.unwrap_or(1)),
        "explicit" => SourceChoice::Explicit(source_vertices.unwrap_or_default()),
        other => {
            return Err(IoError::TypeError {
                key: "sources".into(),
                value: other.into(),
            })
        }
    };
    Ok(c)
}

fn vec3(s: &str) -> Option<Vec3> {
    let v: Vec<f64> = s
        .split(|ch: char| ch == ',' || ch.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().ok().filter(|x: &f64| x.is_finite()))
        .collect::<Option<_>>()?;
    (v.len() == 3).then(|| Vec3::new(v[0], v[1], v[2]))
}

fn weighting(s: &str) -> Option<GrowthWeighting> {
    match s {
        "growth" => Some(GrowthWeighting::Growth),
        "inverse-growth" => Some(GrowthWeighting::InverseGrowth),
        "constant" => Some(GrowthWeighting::Constant),
        _ => None,
    }
}

fn weighting_name(w: GrowthWeighting) -> &'static str {
    match w {
        GrowthWeighting::Growth => "growth",
        GrowthWeighting::InverseGrowth => "inverse-growth",
        GrowthWeighting::Constant => "constant",
    }
}

fn v3(v: Vec3) -> String {
    format!("{} {} {}", v.x, v.y, v.z)
}

/// Every key with its value; parsing the output gives back `c`.
pub fn to_config_string(c: &SimConfig) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv(
        "method",
        match c.method {
            Method::Shell => "shell",
            Method::CollisionVariant => "collision",
        }
        .into(),
    );
    kv("cutoff", c.growth.cutoff.to_string());
    kv("steepness", c.growth.steepness.to_string());
    kv("high_at_sources", c.growth.high_at_sources.to_string());
    match &c.sources {
        SourceChoice::AllBoundary => kv("sources", "all-boundary".into()),
        SourceChoice::RandomBoundarySubset(n) => {
            kv("sources", "random-subset".into());
            kv("source_count", n.to_string());
        }
        SourceChoice::Explicit(list) => {
            kv("sources", "explicit".into());
            kv(
                "source_vertices",
                list.iter().map(|v| v.0.to_string()).collect::<Vec<_>>().join(","),
            );
        }
    }
    kv("k_split", c.split.k.to_string());
    kv(
        "split_length",
        match c.split.length {
            SplitLength::Rest => "rest",
            SplitLength::Current => "self",
        }
        .into(),
    );
    kv("collapse_factor", c.collapse_factor.to_string());
    kv("stretch_stiffness", c.stretch_stiffness.to_string());
    kv("bending_kmin", c.bending.k_min.to_string());
    kv("bending_kmax", c.bending.k_max.to_string());
    kv("bending_ramp", c.bending.ramp_steps.to_string());
    kv(
        "bending_weight",
        match c.bending_weight {
            BendingWeight::Rest => "rest",
            BendingWeight::Current => "current",
        }
        .into(),
    );
    kv("alpha", c.alpha.to_string());
    kv("beta", c.beta.to_string());
    kv("fairing_tolerance", c.fairing_tolerance.to_string());
    kv(
        "fairing_weight",
        match c.fairing_weight {
            FaceWeight::Area => "area",
            FaceWeight::CircumradiusOverArea => "circumradius",
        }
        .into(),
    );
    kv("collider_normal_factor", c.normal_factor.to_string());
    kv("collider_tangent_factor", c.tangent_factor.to_string());
    kv("collision_k", c.collision.stiffness.to_string());
    kv("collision_lambda", c.collision.smoothing.to_string());
    kv(
        "collision_pairs",
        match c.collision.evaluation {
            PairEvaluation::LowerHandle => "lower-handle",
            PairEvaluation::BothOrders => "both-orders",
        }
        .into(),
    );
    kv("growth_collision_k", c.growth_collision.stiffness.to_string());
    kv("growth_collision_gmin", c.growth_collision.g_min.to_string());
    kv("gravity", v3(c.external.gravity));
    kv("gravity_weighting", weighting_name(c.external.gravity_weighting).into());
    kv("rotation_axis", v3(c.external.rotation_axis));
    kv("rotation_center", v3(c.external.rotation_center));
    kv("rotation_strength", c.external.rotation_strength.to_string());
    kv("rotation_weighting", weighting_name(c.external.rotation_weighting).into());
    kv("dt", c.dt.to_string());
    kv("max_steps", c.max_steps.to_string());
    kv("max_vertices", c.max_vertices.to_string());
    kv("export_every", c.export_every.to_string());
    kv("seed", c.seed.to_string());
    kv("record_timing", c.record_timing.to_string());
    s
}
