//! `uavplan` command line: `plan`, `evaluate`, `benchmark`, `generate`.
//!
//! Exit codes: 0 success, 1 bad input or I/O failure, 2 infeasible mission,
//! 3 benchmark ordering or safety violation. Output files are written to a
//! temporary file in the target directory and renamed into place, so a
//! failing command never leaves a partial file behind.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::benchmark::{self, BenchmarkConfig};
use crate::metrics::{self, DEFAULT_SEQUENTIAL_SAMPLES};
use crate::planner::{self, PlanMode, PlanOptions, TourInit};
use crate::scene_io::{self, GenParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "uavplan", version, about = "Obstacle-aware UAV mission planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a mission for one scene and write a plan file.
    Plan(PlanArgs),
    /// Compare a generated plan against a reference trajectory.
    Evaluate(EvaluateArgs),
    /// Run all planners over seeded synthetic scenes and write a CSV.
    Benchmark(BenchmarkArgs),
    /// Write one seeded synthetic scene document.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// tsp-euclid, astar-seq, hybrid or reference
    #[arg(long, default_value = "hybrid")]
    pub mode: PlanMode,
    #[arg(long)]
    pub out: PathBuf,
    /// Move blocked home/target cells to the nearest free cell.
    #[arg(long)]
    pub snap: bool,
    #[arg(long)]
    pub snap_radius: Option<usize>,
    /// Obstacle inflation in cells.
    #[arg(long)]
    pub margin: Option<usize>,
    /// Start 2-opt from a nearest-neighbour tour instead of detection order.
    #[arg(long)]
    pub nearest_neighbor: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub gen: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEQUENTIAL_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub include_pathpoints: bool,
}

#[derive(Debug, Args, Clone)]
pub struct GenArgs {
    #[arg(long, default_value_t = 800)]
    pub width: u32,
    #[arg(long, default_value_t = 800)]
    pub height: u32,
    #[arg(long, default_value_t = 5)]
    pub cell_size: u32,
    #[arg(long, default_value_t = 8)]
    pub targets: usize,
    #[arg(long, default_value_t = 6)]
    pub obstacles: usize,
    #[arg(long, default_value_t = 0.5)]
    pub disc_fraction: f64,
    #[arg(long, default_value_t = 30.0)]
    pub min_obstacle: f64,
    #[arg(long, default_value_t = 90.0)]
    pub max_obstacle: f64,
    #[arg(long, default_value_t = 10.0)]
    pub clearance: f64,
    #[arg(long, default_value_t = 100.0)]
    pub altitude: f64,
}

impl GenArgs {
    fn params(&self, seed: u64) -> GenParams {
        GenParams {
            seed,
            width_px: self.width,
            height_px: self.height,
            cell_size_px: self.cell_size,
            n_targets: self.targets,
            n_obstacles: self.obstacles,
            disc_fraction: self.disc_fraction,
            min_obstacle_px: self.min_obstacle,
            max_obstacle_px: self.max_obstacle,
            clearance_px: self.clearance,
            altitude_m: self.altitude,
            ..GenParams::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, default_value_t = 50)]
    pub scenes: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write mission polylines (`scene,mode,idx,lat,lon`).
    #[arg(long)]
    pub polylines: Option<PathBuf>,
    /// Record per-plan wall time (makes the CSV non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[arg(long, default_value_t = DEFAULT_SEQUENTIAL_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub include_pathpoints: bool,
    #[command(flatten)]
    pub gen: GenArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub gen: GenArgs,
}

/// Writes `contents` to `path` via a temp file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let (code, msg) = match cli.command {
        Command::Plan(a) => cmd_plan(&a, out),
        Command::Evaluate(a) => cmd_evaluate(&a, out),
        Command::Benchmark(a) => cmd_benchmark(&a, out, err),
        Command::Generate(a) => cmd_generate(&a, out),
    };
    if let Some(m) = msg {
        let _ = writeln!(err, "error: {m}");
    }
    code
}

type Outcome = (i32, Option<String>);

fn fail(code: i32, msg: impl Into<String>) -> Outcome {
    (code, Some(msg.into()))
}

pub fn cmd_plan(a: &PlanArgs, out: &mut dyn Write) -> Outcome {
    let text = match read(&a.scene) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let mut scene = match scene_io::load_scene(&text) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", a.scene.display())),
    };
    if a.snap {
        scene.params.snap_endpoints = true;
    }
    if let Some(r) = a.snap_radius {
        scene.params.snap_radius_cells = r;
    }
    if let Some(m) = a.margin {
        scene.params.margin_cells = m;
    }
    let opts = PlanOptions {
        tour_init: if a.nearest_neighbor {
            TourInit::NearestNeighbor
        } else {
            TourInit::InputOrder
        },
    };
    let mission = match planner::plan(&scene, a.mode, &opts) {
        Ok(m) => m,
        Err(e) if e.is_infeasible() => return fail(EXIT_INFEASIBLE, e.to_string()),
        Err(e) => return fail(EXIT_INPUT, e.to_string()),
    };
    if let Err(e) = write_atomic(&a.out, &scene_io::save_mission(&mission)) {
        return fail(EXIT_INPUT, format!("cannot write {}: {e}", a.out.display()));
    }
    let _ = writeln!(out, "length_km={:.3}", mission.length_m / 1000.0);
    (EXIT_OK, None)
}

pub fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Outcome {
    let load = |p: &Path| -> Result<scene_io::LoadedTrajectory, String> {
        scene_io::load_reference(&read(p)?, a.include_pathpoints).map_err(|e| format!("{}: {e}", p.display()))
    };
    let (gen, reference) = match (load(&a.gen), load(&a.reference)) {
        (Ok(g), Ok(r)) => (g, r),
        (Err(e), _) | (_, Err(e)) => return fail(EXIT_INPUT, e),
    };
    let e = match metrics::compare(&gen.metric_points, &reference.metric_points, a.samples) {
        Ok(e) => e,
        Err(e) => return fail(EXIT_INPUT, e.to_string()),
    };
    let _ = writeln!(
        out,
        "{:.3},{:.3},{:.3},{:.3},{:.3}",
        e.knn_m,
        e.dtw_m,
        e.seq_m,
        gen.full.length_m() / 1000.0,
        reference.full.length_m() / 1000.0
    );
    (EXIT_OK, None)
}

pub fn cmd_benchmark(a: &BenchmarkArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let cfg = BenchmarkConfig {
        n_scenes: a.scenes,
        gen: a.gen.params(a.seed),
        samples: a.samples,
        include_pathpoints: a.include_pathpoints,
        record_timing: a.timing,
    };
    if let Err(e) = cfg.gen.validate() {
        return fail(EXIT_INPUT, e.to_string());
    }
    let t0 = Instant::now();
    let result = match benchmark::run(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_INPUT, e.to_string()),
    };
    if let Err(e) = write_atomic(&a.out, &result.to_csv()) {
        return fail(EXIT_INPUT, format!("cannot write {}: {e}", a.out.display()));
    }
    if let Some(p) = &a.polylines {
        if let Err(e) = write_atomic(p, &result.polylines_csv()) {
            return fail(EXIT_INPUT, format!("cannot write {}: {e}", p.display()));
        }
    }
    let _ = writeln!(out, "{}", result.summary());
    let _ = writeln!(err, "wall_s={:.2}", t0.elapsed().as_secs_f64());
    if result.ordering_violations() > 0 || result.unsafe_cells() > 0 {
        return fail(EXIT_VIOLATION, "length ordering or obstacle safety violated");
    }
    (EXIT_OK, None)
}

pub fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Outcome {
    let scene = match scene_io::generate_scene(&a.gen.params(a.seed)) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_INPUT, e.to_string()),
    };
    if let Err(e) = write_atomic(&a.out, &scene_io::save_scene(&scene)) {
        return fail(EXIT_INPUT, format!("cannot write {}: {e}", a.out.display()));
    }
    let _ = writeln!(
        out,
        "wrote {} ({} targets, {} obstacles)",
        a.out.display(),
        scene.targets.len(),
        scene.obstacles.len()
    );
    (EXIT_OK, None)
}
