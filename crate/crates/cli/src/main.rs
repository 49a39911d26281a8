use std::path::{Path, PathBuf};
use std::process::ExitCode;

use buckle_core::analysis::{metrics, MetricsReport};
use buckle_core::io::{
    generate, load_obj, metrics_row, parse_config, save_obj, GeneratorSpec, IoError, RunDirectory, SurfaceKind,
    METRICS_HEADER,
};
use buckle_core::sim::{run, Method, RunError, SimConfig, StopReason};
use buckle_core::Mesh;
use clap::{Args, Parser, Subcommand, ValueEnum};

const USAGE: u8 = 1;
const RUN_FAILURE: u8 = 2;
const VALIDATION_FAILURE: u8 = 3;

/// Differential growth of open triangle meshes.
#[derive(Parser)]
#[command(name = "buckle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grow a surface and write a run directory.
    Grow(GrowArgs),
    /// Print one metrics CSV row for a mesh.
    Metrics {
        #[arg(long)]
        input: PathBuf,
        /// Print the CSV header first.
        #[arg(long)]
        header: bool,
    },
    /// Exit 0 iff the mesh is valid and free of self-intersections.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Write a generated initial surface as OBJ.
    Generate {
        #[arg(long, value_parser = parse_kind)]
        kind: SurfaceKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["input", "generate"])))]
struct GrowArgs {
    /// Config file; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_parser = parse_kind)]
    generate: Option<SurfaceKind>,
    #[arg(long)]
    out: PathBuf,
    /// Seeds both the simulation and the generator.
    #[arg(long, env = "CABBAGE_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    max_vertices: Option<usize>,
    #[arg(long)]
    export_every: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Shell,
    Collision,
}

fn parse_kind(s: &str) -> Result<SurfaceKind, String> {
    s.parse().map_err(|e: IoError| e.to_string())
}

enum Failure {
    Usage(String),
    Run(String),
    Invalid(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Grow(args) => grow(args),
        Command::Metrics { input, header } => print_metrics(&input, header),
        Command::Validate { input } => validate(&input),
        Command::Generate { kind, out, seed } => {
            generate(&GeneratorSpec::new(kind, seed)).and_then(|m| save_obj(&m, &out)).map_err(Failure::from)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("run failed: {msg}");
            ExitCode::from(RUN_FAILURE)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("invalid: {msg}");
            ExitCode::from(VALIDATION_FAILURE)
        }
    }
}

fn grow(args: GrowArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => parse_config(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.steps {
        config.max_steps = n;
    }
    if let Some(n) = args.max_vertices {
        config.max_vertices = n;
    }
    if let Some(n) = args.export_every {
        config.export_every = n;
    }
    if let Some(m) = args.method {
        config.method = match m {
            MethodArg::Shell => Method::Shell,
            MethodArg::Collision => Method::CollisionVariant,
        };
    }
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let mesh = match (&args.input, args.generate) {
        (Some(path), _) => load_obj(path)?,
        (None, Some(kind)) => generate(&GeneratorSpec::new(kind, config.seed))?,
        (None, None) => unreachable!("clap enforces the source group"),
    };
    let mut dir = RunDirectory::create(&args.out, &config)?;
    let result = match run(mesh, &config, &mut dir) {
        Ok(r) => r,
        Err(RunError::Sim(e)) => return Err(Failure::Usage(e.to_string())),
        Err(RunError::Sink(e)) => return Err(Failure::Run(e.to_string())),
    };
    dir.finish(&result)?;
    let last = result.frames.last().map(|(_, m)| m);
    println!(
        "stop: {} after {} steps, V={}",
        result.stop.tag(),
        result.reports.len(),
        last.map_or(result.mesh.vertex_count(), |m| m.vertices)
    );
    match result.stop {
        StopReason::Failure(reason) => Err(Failure::Run(reason)),
        _ => Ok(()),
    }
}

/// Mean edge length, or 1 for a mesh without edges.
fn rest_length(mesh: &Mesh) -> f64 {
    let l = mesh.mean_edge_length();
    if l > 0.0 && l.is_finite() { l } else { 1.0 }
}

fn measure(input: &Path) -> Result<MetricsReport, Failure> {
    let mesh = load_obj(input)?;
    Ok(metrics(&mesh, rest_length(&mesh)))
}

fn print_metrics(input: &Path, header: bool) -> Result<(), Failure> {
    let m = measure(input)?;
    if header {
        println!("{METRICS_HEADER}");
    }
    println!("{}", metrics_row(0, None, &m, 0.0));
    Ok(())
}

fn validate(input: &Path) -> Result<(), Failure> {
    let mesh = match load_obj(input) {
        Ok(m) => m,
        Err(e @ (IoError::Build(_) | IoError::Parse { .. })) => return Err(Failure::Invalid(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let m = metrics(&mesh, rest_length(&mesh));
    if let Some(f) = m.failure {
        return Err(Failure::Invalid(f.to_string()));
    }
    if m.self_intersections > 0 {
        return Err(Failure::Invalid(format!("{} self-intersecting face pairs", m.self_intersections)));
    }
    println!("ok: V={} E={} F={}", m.vertices, m.edges, m.faces);
    Ok(())
}
