//! Scene documents, plan files, reference trajectories, and the seeded
//! synthetic scene generator.
//!
//! Scene documents are JSON (see `docs/scene-format.md`). Plan files are
//! line-oriented and byte-stable:
//!
//! ```text
//! UAVVLPA PLAN 1
//! 0 TAKEOFF 40.0000000 -100.0000000 100.0
//! 1 WAYPOINT 39.9990000 -99.9980000 100.0
//! 2 RTL 40.0000000 -100.0000000 0.0
//! LENGTH_KM 0.412
//! ```

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{GeoPoint, GeoTransform, PixelPoint};
use crate::grid::{build_grid, GridSpec, Obstacle, DEFAULT_CELL_SIZE_PX};
use crate::metrics::Trajectory;
use crate::planner::{self, ItemKind, Mission, MissionItem, MissionParams, PlanError, Scene};

pub const SCHEMA_VERSION: u32 = 1;
pub const PLAN_HEADER: &str = "UAVVLPA PLAN 1";
pub const DEFAULT_OBSTACLE_RADIUS_PX: f64 = 15.0;
pub const MAX_GENERATION_ATTEMPTS: u32 = 100;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Schema { field: String, message: String },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("file is empty")]
    Empty,
    #[error("scene generation failed after {attempts} attempts: {last}")]
    Generation { attempts: u32, last: String },
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> SceneError {
    SceneError::Schema {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageSize {
    pub width_px: u32,
    pub height_px: u32,
}

/// Obstacle as it appears in a scene document. `point` is a bare detection
/// and becomes a disc of `obstacle_default_radius_px`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleDoc {
    Polygon { vertices: Vec<PixelPoint> },
    Disc { center: PixelPoint, radius_px: f64 },
    Point { at: PixelPoint },
}

fn default_cell_size() -> u32 {
    DEFAULT_CELL_SIZE_PX
}

fn default_obstacle_radius() -> f64 {
    DEFAULT_OBSTACLE_RADIUS_PX
}

/// On-disk scene document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub schema_version: u32,
    pub name: String,
    pub image: ImageSize,
    pub transform: GeoTransform,
    #[serde(default = "default_cell_size")]
    pub cell_size_px: u32,
    pub home: PixelPoint,
    #[serde(default)]
    pub targets: Vec<PixelPoint>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleDoc>,
    #[serde(default = "default_obstacle_radius")]
    pub obstacle_default_radius_px: f64,
    #[serde(default)]
    pub params: MissionParams,
}

impl SceneFile {
    pub fn from_scene(scene: &Scene) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: scene.name.clone(),
            image: ImageSize {
                width_px: scene.spec.width_px,
                height_px: scene.spec.height_px,
            },
            transform: scene.transform,
            cell_size_px: scene.spec.cell_size_px,
            home: scene.home,
            targets: scene.targets.clone(),
            obstacles: scene
                .obstacles
                .iter()
                .map(|o| match o {
                    Obstacle::Polygon { vertices } => ObstacleDoc::Polygon {
                        vertices: vertices.clone(),
                    },
                    Obstacle::Disc { center, radius_px } => ObstacleDoc::Disc {
                        center: *center,
                        radius_px: *radius_px,
                    },
                })
                .collect(),
            obstacle_default_radius_px: DEFAULT_OBSTACLE_RADIUS_PX,
            params: scene.params,
        }
    }

    pub fn into_scene(self) -> Result<Scene, SceneError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(schema(
                "schema_version",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        let spec = GridSpec::new(self.cell_size_px, self.image.width_px, self.image.height_px)
            .map_err(|e| schema("image", e.to_string()))?;
        self.transform
            .validate()
            .map_err(|e| schema("transform", e.to_string()))?;
        if !(self.obstacle_default_radius_px.is_finite() && self.obstacle_default_radius_px > 0.0) {
            return Err(schema("obstacle_default_radius_px", "must be > 0"));
        }
        if !(self.params.altitude_m.is_finite() && self.params.altitude_m > 0.0) {
            return Err(schema("params.altitude_m", "must be > 0"));
        }
        let in_extent = |p: &PixelPoint| p.is_finite() && spec.contains_point(*p);
        if !in_extent(&self.home) {
            return Err(schema("home", "outside image extent"));
        }
        for (k, t) in self.targets.iter().enumerate() {
            if !in_extent(t) {
                return Err(schema(format!("targets[{k}]"), "outside image extent"));
            }
        }
        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        for (k, o) in self.obstacles.into_iter().enumerate() {
            let field = format!("obstacles[{k}]");
            let obstacle = match o {
                ObstacleDoc::Polygon { vertices } => {
                    if let Some(v) = vertices.iter().position(|p| !in_extent(p)) {
                        return Err(schema(format!("{field}.vertices[{v}]"), "outside image extent"));
                    }
                    Obstacle::Polygon { vertices }
                }
                ObstacleDoc::Disc { center, radius_px } => {
                    if !in_extent(&center) {
                        return Err(schema(format!("{field}.center"), "outside image extent"));
                    }
                    Obstacle::Disc { center, radius_px }
                }
                ObstacleDoc::Point { at } => {
                    if !in_extent(&at) {
                        return Err(schema(format!("{field}.at"), "outside image extent"));
                    }
                    Obstacle::Disc {
                        center: at,
                        radius_px: self.obstacle_default_radius_px,
                    }
                }
            };
            obstacle.validate().map_err(|e| schema(field, e.to_string()))?;
            obstacles.push(obstacle);
        }
        let scene = Scene {
            name: self.name,
            transform: self.transform,
            spec,
            home: self.home,
            targets: self.targets,
            obstacles,
            params: self.params,
        };
        scene.validate().map_err(|e| schema("scene", e.to_string()))?;
        Ok(scene)
    }
}

pub fn load_scene(text: &str) -> Result<Scene, SceneError> {
    let doc: SceneFile = serde_json::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))?;
    doc.into_scene()
}

pub fn save_scene(scene: &Scene) -> String {
    let mut s = serde_json::to_string_pretty(&SceneFile::from_scene(scene)).expect("scene serializes");
    s.push('\n');
    s
}

pub fn save_mission(m: &Mission) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    out.push_str(PLAN_HEADER);
    out.push('\n');
    for (k, it) in m.items.iter().enumerate() {
        writeln!(
            out,
            "{k} {} {:.7} {:.7} {:.1}",
            it.kind.token(),
            it.geo.lat,
            it.geo.lon,
            it.alt_m
        )
        .unwrap();
    }
    writeln!(out, "LENGTH_KM {:.3}", m.length_m / 1000.0).unwrap();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanFile {
    pub items: Vec<MissionItem>,
    pub length_km: f64,
}

fn line_err(line: usize, message: impl Into<String>) -> SceneError {
    SceneError::Line {
        line,
        message: message.into(),
    }
}

pub fn parse_plan(text: &str) -> Result<PlanFile, SceneError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    match lines.next() {
        None => return Err(SceneError::Empty),
        Some((_, h)) if h == PLAN_HEADER => {}
        Some((n, h)) => return Err(line_err(n, format!("expected '{PLAN_HEADER}', got '{h}'"))),
    }
    let mut items = Vec::new();
    let mut length_km = None;
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        if length_km.is_some() {
            return Err(line_err(n, "content after LENGTH_KM footer"));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "LENGTH_KM" {
            if fields.len() != 2 {
                return Err(line_err(n, "LENGTH_KM takes one value"));
            }
            length_km = Some(fields[1].parse::<f64>().map_err(|e| line_err(n, e.to_string()))?);
            continue;
        }
        if fields.len() != 5 {
            return Err(line_err(n, format!("expected 5 fields, got {}", fields.len())));
        }
        let idx: usize = fields[0].parse().map_err(|_| line_err(n, "bad item index"))?;
        if idx != items.len() {
            return Err(line_err(n, format!("item index {idx}, expected {}", items.len())));
        }
        let kind = ItemKind::from_token(fields[1])
            .ok_or_else(|| line_err(n, format!("unknown item kind '{}'", fields[1])))?;
        let num = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|_| line_err(n, format!("bad {what} '{s}'")))
        };
        let geo = GeoPoint::new(num(fields[2], "latitude")?, num(fields[3], "longitude")?)
            .map_err(|e| line_err(n, e.to_string()))?;
        let alt_m = num(fields[4], "altitude")?;
        items.push(MissionItem { kind, geo, alt_m });
    }
    let length_km = length_km.ok_or_else(|| line_err(text.lines().count(), "missing LENGTH_KM footer"))?;
    if items.is_empty() {
        return Err(SceneError::Empty);
    }
    Ok(PlanFile { items, length_km })
}

/// A loaded reference or generated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTrajectory {
    /// Points used for metrics (Waypoint-level unless path points are included).
    pub metric_points: Trajectory,
    /// Every point in file order; its polyline length is the flown length.
    pub full: Trajectory,
}

/// Reads a plan file or a `lat,lon` CSV.
pub fn load_reference(text: &str, include_pathpoints: bool) -> Result<LoadedTrajectory, SceneError> {
    if text.trim().is_empty() {
        return Err(SceneError::Empty);
    }
    if text.trim_start().starts_with(PLAN_HEADER) {
        let plan = parse_plan(text)?;
        let full: Vec<GeoPoint> = plan.items.iter().map(|i| i.geo).collect();
        let metric: Vec<GeoPoint> = plan
            .items
            .iter()
            .filter(|i| include_pathpoints || i.kind.is_waypoint_level())
            .map(|i| i.geo)
            .collect();
        return Ok(LoadedTrajectory {
            metric_points: Trajectory::new(metric).map_err(|_| SceneError::Empty)?,
            full: Trajectory::new(full).map_err(|_| SceneError::Empty)?,
        });
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| line_err(1, e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "lat" || &headers[1] != "lon" {
        return Err(line_err(1, "expected header 'lat,lon'"));
    }
    let mut pts = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            line_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| line_err(line, format!("bad number '{s}'")))
        };
        let geo =
            GeoPoint::new(parse(&rec[0])?, parse(&rec[1])?).map_err(|e| line_err(line, e.to_string()))?;
        pts.push(geo);
    }
    let t = Trajectory::new(pts).map_err(|_| SceneError::Empty)?;
    Ok(LoadedTrajectory {
        metric_points: t.clone(),
        full: t,
    })
}

/// Trajectory of a mission, Waypoint-level unless path points are included.
pub fn mission_trajectory(m: &Mission, include_pathpoints: bool) -> Trajectory {
    let pts = if include_pathpoints {
        m.geo_polyline()
    } else {
        m.waypoint_polyline()
    };
    Trajectory::new(pts).expect("missions always hold takeoff and RTL")
}

/// Synthetic scene parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenParams {
    pub seed: u64,
    pub width_px: u32,
    pub height_px: u32,
    pub cell_size_px: u32,
    pub n_targets: usize,
    pub n_obstacles: usize,
    /// Fraction of obstacles that are discs; the rest are polygons.
    pub disc_fraction: f64,
    pub min_obstacle_px: f64,
    pub max_obstacle_px: f64,
    /// Minimum distance from home/targets to any obstacle boundary.
    pub clearance_px: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub deg_per_px_x: f64,
    pub deg_per_px_y: f64,
    pub altitude_m: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            seed: 1,
            width_px: 800,
            height_px: 800,
            cell_size_px: DEFAULT_CELL_SIZE_PX,
            n_targets: 8,
            n_obstacles: 6,
            disc_fraction: 0.5,
            min_obstacle_px: 30.0,
            max_obstacle_px: 90.0,
            clearance_px: 10.0,
            // roughly square ~1 m pixels at 40°N
            origin_lat: 40.0,
            origin_lon: -100.0,
            deg_per_px_x: 0.00001175,
            deg_per_px_y: 0.000009,
            altitude_m: 100.0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), SceneError> {
        GridSpec::new(self.cell_size_px, self.width_px, self.height_px)
            .map_err(|e| schema("grid", e.to_string()))?;
        GeoTransform::new(
            self.origin_lat,
            self.origin_lon,
            self.deg_per_px_x,
            self.deg_per_px_y,
        )
        .map_err(|e| schema("transform", e.to_string()))?;
        if !(0.0..=1.0).contains(&self.disc_fraction) {
            return Err(schema("disc_fraction", "must be in [0, 1]"));
        }
        if !(self.min_obstacle_px > 0.0 && self.max_obstacle_px >= self.min_obstacle_px) {
            return Err(schema("obstacle size", "need 0 < min <= max"));
        }
        if !(self.clearance_px >= 0.0 && self.clearance_px.is_finite()) {
            return Err(schema("clearance_px", "must be >= 0"));
        }
        if !(self.altitude_m.is_finite() && self.altitude_m > 0.0) {
            return Err(schema("altitude_m", "must be > 0"));
        }
        Ok(())
    }
}

/// ChaCha8 stream keyed by `(seed, stream)`. Floats use the top 53 bits of
/// `next_u64`, so values do not depend on any distribution implementation.
struct Stream(ChaCha8Rng);

impl Stream {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Stream(rng)
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn below(&mut self, n: u64) -> u64 {
        // multiply-shift; bias is irrelevant at these sizes
        ((self.0.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

const STREAM_OBSTACLES: u64 = 1;
const STREAM_POINTS: u64 = 2;

fn stream_id(attempt: u32, element: u64) -> u64 {
    ((attempt as u64) << 8) | element
}

/// Rounds to 1/1024 px so generated coordinates are short and exact in JSON.
fn quantize(v: f64) -> f64 {
    (v * 1024.0).round() / 1024.0
}

fn gen_obstacle(rng: &mut Stream, p: &GenParams) -> Obstacle {
    let (w, h) = (p.width_px as f64, p.height_px as f64);
    let size = rng.range(p.min_obstacle_px, p.max_obstacle_px);
    let cx = rng.range(0.0, w);
    let cy = rng.range(0.0, h);
    let clamp = |x: f64, hi: f64| quantize(x.clamp(0.0, hi - 1.0 / 1024.0));
    if rng.unit() < p.disc_fraction {
        Obstacle::Disc {
            center: PixelPoint::new(clamp(cx, w), clamp(cy, h)),
            radius_px: quantize(size),
        }
    } else {
        // star-shaped polygon: sorted angles with jitter are always simple
        let n = 5 + rng.below(4) as usize;
        let phase = rng.range(0.0, std::f64::consts::TAU);
        let vertices = (0..n)
            .map(|k| {
                let ang = phase + (k as f64 + rng.range(-0.3, 0.3)) * std::f64::consts::TAU / n as f64;
                let r = size * rng.range(0.55, 1.0);
                PixelPoint::new(
                    clamp(cx + r * libm::cos(ang), w),
                    clamp(cy + r * libm::sin(ang), h),
                )
            })
            .collect();
        Obstacle::Polygon { vertices }
    }
}

fn clear_of_obstacles(q: PixelPoint, obstacles: &[Obstacle], clearance: f64) -> bool {
    obstacles.iter().all(|o| {
        let rect = (q.x - clearance, q.y - clearance, q.x + clearance, q.y + clearance);
        !o.intersects_rect(rect)
    })
}

fn try_generate(p: &GenParams, attempt: u32) -> Result<Scene, String> {
    let spec = GridSpec::new(p.cell_size_px, p.width_px, p.height_px).map_err(|e| e.to_string())?;
    let transform = GeoTransform::new(p.origin_lat, p.origin_lon, p.deg_per_px_x, p.deg_per_px_y)
        .map_err(|e| e.to_string())?;
    let mut orng = Stream::new(p.seed, stream_id(attempt, STREAM_OBSTACLES));
    let mut obstacles = Vec::with_capacity(p.n_obstacles);
    while obstacles.len() < p.n_obstacles {
        let o = gen_obstacle(&mut orng, p);
        if o.validate().is_ok() {
            obstacles.push(o);
        }
    }
    let grid = build_grid(spec, &obstacles, 0);
    let mut prng = Stream::new(p.seed, stream_id(attempt, STREAM_POINTS));
    let (w, h) = (p.width_px as f64, p.height_px as f64);
    let mut points = Vec::with_capacity(p.n_targets + 1);
    for k in 0..=p.n_targets {
        let mut placed = None;
        for _ in 0..1000 {
            let q = PixelPoint::new(
                quantize(prng.range(0.0, w - 1.0)),
                quantize(prng.range(0.0, h - 1.0)),
            );
            let cell = spec.cell_of(q).map_err(|e| e.to_string())?;
            if grid.is_traversable(cell) && clear_of_obstacles(q, &obstacles, p.clearance_px) {
                placed = Some(q);
                break;
            }
        }
        points.push(placed.ok_or_else(|| format!("could not place point {k} clear of obstacles"))?);
    }
    let scene = Scene {
        name: format!("synthetic-{:016x}", p.seed),
        transform,
        spec,
        home: points[0],
        targets: points[1..].to_vec(),
        obstacles,
        params: MissionParams {
            altitude_m: p.altitude_m,
            ..MissionParams::default()
        },
    };
    planner::plan_hybrid(&scene).map_err(|e: PlanError| e.to_string())?;
    Ok(scene)
}

/// Deterministic synthetic scene: obstacles first, then home and targets
/// placed clear of them; retried on infeasibility up to
/// [`MAX_GENERATION_ATTEMPTS`] times.
pub fn generate_scene(p: &GenParams) -> Result<Scene, SceneError> {
    p.validate()?;
    let mut last = String::new();
    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        match try_generate(p, attempt) {
            Ok(scene) => return Ok(scene),
            Err(e) => last = e,
        }
    }
    Err(SceneError::Generation {
        attempts: MAX_GENERATION_ATTEMPTS,
        last,
    })
}
