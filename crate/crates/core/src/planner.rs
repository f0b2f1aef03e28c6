//! End-to-end mission planners.
//!
//! * [`PlanMode::TspEuclid`]: 2-opt over straight-line distances, obstacles ignored.
//! * [`PlanMode::AstarSeq`]: targets in detection order, each leg an A* path.
//! * [`PlanMode::Hybrid`]: 2-opt over the matrix of A* leg lengths, legs
//!   stitched from the same cached paths.
//!
//! A leg between nodes `a` and `b` is always searched from the lower node
//! index to the higher one and reversed when flown the other way, so both
//! A*-based planners fly identical geometry for the same node pair. The leg
//! polyline is `a → center(start cell) → pruned A* vertices → center(goal cell) → b`
//! and its haversine length is the cost-matrix entry; a tour's matrix cost is
//! therefore the flown mission length.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astar::{self, AstarError, CellPath};
use crate::geo::{self, GeoError, GeoPoint, GeoTransform, PixelPoint};
use crate::grid::{self, CellIndex, GridError, GridSpec, Obstacle, OccupancyGrid};
use crate::tsp::{self, CostMatrix, TspError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Tsp(#[from] TspError),
    #[error("infeasible endpoint: {node} at cell {cell} is blocked{hint}")]
    InfeasibleEndpoint {
        node: String,
        cell: CellIndex,
        hint: String,
    },
    #[error("infeasible mission: no obstacle-free path between {from} and {to}")]
    InfeasibleMission { from: String, to: String },
}

impl PlanError {
    /// True for errors that mean "no feasible plan" rather than bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            PlanError::InfeasibleEndpoint { .. } | PlanError::InfeasibleMission { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MissionParams {
    pub altitude_m: f64,
    pub margin_cells: usize,
    pub snap_endpoints: bool,
    pub snap_radius_cells: usize,
}

impl Default for MissionParams {
    fn default() -> Self {
        Self {
            altitude_m: 100.0,
            margin_cells: 0,
            snap_endpoints: false,
            snap_radius_cells: 3,
        }
    }
}

/// Everything the planners need about one image: georeference, grid,
/// home point, targets in detection order, and obstacle footprints.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    pub transform: GeoTransform,
    pub spec: GridSpec,
    pub home: PixelPoint,
    pub targets: Vec<PixelPoint>,
    pub obstacles: Vec<Obstacle>,
    pub params: MissionParams,
}

impl Scene {
    pub fn validate(&self) -> Result<(), PlanError> {
        self.transform.validate()?;
        self.spec.validate()?;
        if !(self.params.altitude_m.is_finite() && self.params.altitude_m > 0.0) {
            return Err(PlanError::InvalidScene(format!(
                "altitude_m must be > 0, got {}",
                self.params.altitude_m
            )));
        }
        if !self.spec.contains_point(self.home) {
            return Err(PlanError::InvalidScene("home lies outside the image".into()));
        }
        if let Some(k) = self.targets.iter().position(|t| !self.spec.contains_point(*t)) {
            return Err(PlanError::InvalidScene(format!(
                "target {k} lies outside the image"
            )));
        }
        for (k, o) in self.obstacles.iter().enumerate() {
            o.validate()
                .map_err(|e| PlanError::InvalidScene(format!("obstacle {k}: {e}")))?;
        }
        Ok(())
    }

    pub fn build_grid(&self) -> OccupancyGrid {
        grid::build_grid(self.spec, &self.obstacles, self.params.margin_cells)
    }

    /// Home is node 0, target `k` is node `k + 1`.
    pub fn node_count(&self) -> usize {
        self.targets.len() + 1
    }

    pub fn node_pixel(&self, node: usize) -> PixelPoint {
        if node == 0 {
            self.home
        } else {
            self.targets[node - 1]
        }
    }

    pub fn node_geo(&self, node: usize) -> Result<GeoPoint, PlanError> {
        Ok(self.transform.geo_from_pixel(self.node_pixel(node))?)
    }

    /// Meters per pixel `(x, y)` at the image's center latitude.
    pub fn meters_per_px(&self) -> (f64, f64) {
        let center_y = self.spec.height_px as f64 / 2.0;
        let lat = self.transform.origin_lat - center_y * self.transform.deg_per_px_y;
        self.transform.meters_per_px_at(lat)
    }

    /// Converts an A* cost in cell units to meters with a single scene-wide
    /// scale (geometric mean of the x and y pixel sizes).
    pub fn cells_to_meters(&self, cost_cells: f64) -> f64 {
        let (mx, my) = self.meters_per_px();
        cost_cells * self.spec.cell_size_px as f64 * (mx * my).sqrt()
    }
}

pub fn node_name(node: usize) -> String {
    if node == 0 {
        "home".to_string()
    } else {
        format!("target {}", node - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlanMode {
    #[serde(rename = "tsp-euclid")]
    TspEuclid,
    #[serde(rename = "astar-seq")]
    AstarSeq,
    #[serde(rename = "hybrid")]
    Hybrid,
    /// Straight legs in detection order; the baseline the others are compared to.
    #[serde(rename = "reference")]
    InputOrder,
}

impl PlanMode {
    pub const PLANNERS: [PlanMode; 3] = [PlanMode::TspEuclid, PlanMode::AstarSeq, PlanMode::Hybrid];

    pub fn as_str(&self) -> &'static str {
        match self {
            PlanMode::TspEuclid => "tsp-euclid",
            PlanMode::AstarSeq => "astar-seq",
            PlanMode::Hybrid => "hybrid",
            PlanMode::InputOrder => "reference",
        }
    }
}

impl std::fmt::Display for PlanMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PlanMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsp-euclid" => Ok(PlanMode::TspEuclid),
            "astar-seq" => Ok(PlanMode::AstarSeq),
            "hybrid" => Ok(PlanMode::Hybrid),
            "reference" => Ok(PlanMode::InputOrder),
            other => Err(format!(
                "unknown mode '{other}' (expected tsp-euclid, astar-seq, hybrid or reference)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TourInit {
    /// Detection order.
    #[default]
    InputOrder,
    NearestNeighbor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlanOptions {
    pub tour_init: TourInit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ItemKind {
    Takeoff,
    Waypoint,
    PathPoint,
    ReturnToLand,
}

impl ItemKind {
    pub fn token(&self) -> &'static str {
        match self {
            ItemKind::Takeoff => "TAKEOFF",
            ItemKind::Waypoint => "WAYPOINT",
            ItemKind::PathPoint => "PATHPOINT",
            ItemKind::ReturnToLand => "RTL",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "TAKEOFF" => Some(ItemKind::Takeoff),
            "WAYPOINT" => Some(ItemKind::Waypoint),
            "PATHPOINT" => Some(ItemKind::PathPoint),
            "RTL" => Some(ItemKind::ReturnToLand),
            _ => None,
        }
    }

    /// Takeoff, Waypoint and ReturnToLand; the points reference plans contain.
    pub fn is_waypoint_level(&self) -> bool {
        !matches!(self, ItemKind::PathPoint)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionItem {
    pub kind: ItemKind,
    pub geo: GeoPoint,
    pub alt_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mission {
    pub mode: PlanMode,
    pub items: Vec<MissionItem>,
    pub length_m: f64,
    /// Target indices in visiting order.
    pub visit_order: Vec<usize>,
    /// A* cell paths of every flown leg in flight order; empty for straight-leg modes.
    pub legs: Vec<CellPath>,
}

impl Mission {
    pub fn geo_polyline(&self) -> Vec<GeoPoint> {
        self.items.iter().map(|it| it.geo).collect()
    }

    pub fn waypoint_polyline(&self) -> Vec<GeoPoint> {
        self.items
            .iter()
            .filter(|it| it.kind.is_waypoint_level())
            .map(|it| it.geo)
            .collect()
    }
}

/// A* leg between two nodes, stored in the `from → to` direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LegPath {
    pub from: usize,
    pub to: usize,
    pub path: CellPath,
    /// Pruned A* vertices (includes the start and goal cells).
    pub pruned: Vec<CellIndex>,
    /// Haversine length of the flown leg polyline.
    pub length_m: f64,
}

impl LegPath {
    fn reversed(&self) -> LegPath {
        let mut pruned = self.pruned.clone();
        pruned.reverse();
        LegPath {
            from: self.to,
            to: self.from,
            path: self.path.reversed(),
            pruned,
            length_m: self.length_m,
        }
    }
}

/// Obstacle grid plus the traversable cell chosen for every node.
#[derive(Debug, Clone)]
pub struct PlanningContext<'a> {
    pub scene: &'a Scene,
    pub grid: OccupancyGrid,
    pub node_cells: Vec<CellIndex>,
    node_geo: Vec<GeoPoint>,
}

impl<'a> PlanningContext<'a> {
    pub fn new(scene: &'a Scene) -> Result<Self, PlanError> {
        scene.validate()?;
        let grid = scene.build_grid();
        Self::with_grid(scene, grid)
    }

    pub fn with_grid(scene: &'a Scene, grid: OccupancyGrid) -> Result<Self, PlanError> {
        let mut node_cells = Vec::with_capacity(scene.node_count());
        let mut node_geo = Vec::with_capacity(scene.node_count());
        for node in 0..scene.node_count() {
            let cell = scene.spec.cell_of(scene.node_pixel(node))?;
            let cell = if grid.is_traversable(cell) {
                cell
            } else if scene.params.snap_endpoints {
                snap_endpoint(&grid, cell, scene.params.snap_radius_cells).map_err(|_| {
                    PlanError::InfeasibleEndpoint {
                        node: node_name(node),
                        cell,
                        hint: format!(
                            " and no traversable cell within {} cells",
                            scene.params.snap_radius_cells
                        ),
                    }
                })?
            } else {
                return Err(PlanError::InfeasibleEndpoint {
                    node: node_name(node),
                    cell,
                    hint: " (endpoint snapping disabled)".into(),
                });
            };
            node_cells.push(cell);
            node_geo.push(scene.node_geo(node)?);
        }
        Ok(Self {
            scene,
            grid,
            node_cells,
            node_geo,
        })
    }

    fn cell_geo(&self, c: CellIndex) -> Result<GeoPoint, PlanError> {
        let p = self.scene.spec.center_of(c)?;
        Ok(self.scene.transform.geo_from_pixel(p)?)
    }

    /// Vertices of the flown polyline strictly between the two node points.
    fn leg_interior(&self, leg: &LegPath) -> Result<Vec<GeoPoint>, PlanError> {
        let a = self.node_geo[leg.from];
        let b = self.node_geo[leg.to];
        let mut pts = Vec::with_capacity(leg.pruned.len());
        for (k, c) in leg.pruned.iter().enumerate() {
            let g = self.cell_geo(*c)?;
            let dup_start = k == 0 && g == a;
            let dup_end = k + 1 == leg.pruned.len() && g == b;
            if !(dup_start || dup_end) {
                pts.push(g);
            }
        }
        Ok(pts)
    }

    /// Searches the leg between two nodes, lower index first.
    fn search_leg(&self, a: usize, b: usize) -> Result<LegPath, PlanError> {
        let (lo, hi) = (a.min(b), a.max(b));
        let (path, _) =
            astar::astar(&self.grid, self.node_cells[lo], self.node_cells[hi]).map_err(|e| match e {
                AstarError::NoPath { .. } => PlanError::InfeasibleMission {
                    from: node_name(lo),
                    to: node_name(hi),
                },
                AstarError::InvalidEndpoint(cell) => PlanError::InfeasibleEndpoint {
                    node: node_name(if cell == self.node_cells[lo] { lo } else { hi }),
                    cell,
                    hint: String::new(),
                },
            })?;
        let pruned = astar::prune_collinear(&path);
        let mut leg = LegPath {
            from: lo,
            to: hi,
            path,
            pruned,
            length_m: 0.0,
        };
        let mut poly = vec![self.node_geo[lo]];
        poly.extend(self.leg_interior(&leg)?);
        poly.push(self.node_geo[hi]);
        leg.length_m = geo::polyline_length_m(&poly)?;
        Ok(if a <= b { leg } else { leg.reversed() })
    }
}

/// All pairwise A* legs, indexed `[a * n + b]`; entry `(b, a)` is the reverse of `(a, b)`.
#[derive(Debug, Clone)]
pub struct LegCache {
    n: usize,
    legs: Vec<Option<LegPath>>,
}

impl LegCache {
    pub fn get(&self, a: usize, b: usize) -> Option<&LegPath> {
        self.legs[a * self.n + b].as_ref()
    }
}

/// Pairwise leg lengths (meters) and the legs themselves. Upper triangle is
/// searched (in parallel), lower triangle mirrored.
pub fn build_cost_matrix(ctx: &PlanningContext<'_>) -> Result<(CostMatrix, LegCache), PlanError> {
    let n = ctx.scene.node_count();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
    let searched: Vec<Result<LegPath, PlanError>> =
        pairs.par_iter().map(|&(a, b)| ctx.search_leg(a, b)).collect();
    let mut legs: Vec<Option<LegPath>> = vec![None; n * n];
    let mut costs = vec![0.0; n * n];
    for (&(a, b), leg) in pairs.iter().zip(searched) {
        let leg = leg?;
        costs[a * n + b] = leg.length_m;
        costs[b * n + a] = leg.length_m;
        legs[b * n + a] = Some(leg.reversed());
        legs[a * n + b] = Some(leg);
    }
    Ok((CostMatrix::new(n, costs)?, LegCache { n, legs }))
}

/// Nearest traversable cell within Chebyshev `radius`; ties by Euclidean
/// distance, then `(i, j)`.
pub fn snap_endpoint(grid: &OccupancyGrid, c: CellIndex, radius: usize) -> Result<CellIndex, PlanError> {
    if grid.is_traversable(c) {
        return Ok(c);
    }
    let r = radius as isize;
    let (ci, cj) = (c.i as isize, c.j as isize);
    let mut best: Option<(isize, CellIndex)> = None;
    for di in -r..=r {
        for dj in -r..=r {
            let (i, j) = (ci + di, cj + dj);
            if !grid.is_traversable_signed(i, j) {
                continue;
            }
            let cand = CellIndex::new(i as usize, j as usize);
            let key = (di * di + dj * dj, cand);
            if best.is_none_or(|(d, b)| key < (d, b)) {
                best = Some(key);
            }
        }
    }
    best.map(|(_, cell)| cell).ok_or(PlanError::InfeasibleEndpoint {
        node: format!("cell {c}"),
        cell: c,
        hint: format!(" and no traversable cell within {radius} cells"),
    })
}

fn initial_order(m: &CostMatrix, init: TourInit) -> Vec<usize> {
    match init {
        TourInit::InputOrder => (0..m.n()).collect(),
        TourInit::NearestNeighbor => tsp::nearest_neighbor_init(m),
    }
}

fn straight_mission(scene: &Scene, mode: PlanMode, tour: &[usize]) -> Result<Mission, PlanError> {
    let alt = scene.params.altitude_m;
    let home = scene.node_geo(0)?;
    let mut items = vec![MissionItem {
        kind: ItemKind::Takeoff,
        geo: home,
        alt_m: alt,
    }];
    for &node in &tour[1..] {
        items.push(MissionItem {
            kind: ItemKind::Waypoint,
            geo: scene.node_geo(node)?,
            alt_m: alt,
        });
    }
    items.push(MissionItem {
        kind: ItemKind::ReturnToLand,
        geo: home,
        alt_m: 0.0,
    });
    finish(mode, items, tour, Vec::new())
}

fn finish(
    mode: PlanMode,
    items: Vec<MissionItem>,
    tour: &[usize],
    legs: Vec<CellPath>,
) -> Result<Mission, PlanError> {
    let poly: Vec<GeoPoint> = items.iter().map(|it| it.geo).collect();
    Ok(Mission {
        mode,
        length_m: geo::polyline_length_m(&poly)?,
        items,
        visit_order: tour[1..].iter().map(|n| n - 1).collect(),
        legs,
    })
}

fn stitched_mission(
    ctx: &PlanningContext<'_>,
    mode: PlanMode,
    tour: &[usize],
    leg_of: impl Fn(usize, usize) -> Result<LegPath, PlanError>,
) -> Result<Mission, PlanError> {
    let alt = ctx.scene.params.altitude_m;
    let mut items = vec![MissionItem {
        kind: ItemKind::Takeoff,
        geo: ctx.node_geo[0],
        alt_m: alt,
    }];
    let mut legs = Vec::new();
    if tour.len() > 1 {
        for k in 0..tour.len() {
            let (a, b) = (tour[k], tour[(k + 1) % tour.len()]);
            let leg = leg_of(a, b)?;
            for g in ctx.leg_interior(&leg)? {
                items.push(MissionItem {
                    kind: ItemKind::PathPoint,
                    geo: g,
                    alt_m: alt,
                });
            }
            if b != 0 {
                items.push(MissionItem {
                    kind: ItemKind::Waypoint,
                    geo: ctx.node_geo[b],
                    alt_m: alt,
                });
            }
            legs.push(leg.path);
        }
    }
    items.push(MissionItem {
        kind: ItemKind::ReturnToLand,
        geo: ctx.node_geo[0],
        alt_m: 0.0,
    });
    finish(mode, items, tour, legs)
}

/// Straight legs in detection order (the "original" trajectory).
pub fn plan_input_order(scene: &Scene) -> Result<Mission, PlanError> {
    scene.validate()?;
    let tour: Vec<usize> = (0..scene.node_count()).collect();
    straight_mission(scene, PlanMode::InputOrder, &tour)
}

/// Length of the straight-leg detection-order tour.
pub fn input_order_length_m(scene: &Scene) -> Result<f64, PlanError> {
    Ok(plan_input_order(scene)?.length_m)
}

pub fn plan_tsp_euclid(scene: &Scene) -> Result<Mission, PlanError> {
    plan_tsp_euclid_with(scene, &PlanOptions::default())
}

pub fn plan_tsp_euclid_with(scene: &Scene, opts: &PlanOptions) -> Result<Mission, PlanError> {
    scene.validate()?;
    let n = scene.node_count();
    let pts = (0..n).map(|k| scene.node_geo(k)).collect::<Result<Vec<_>, _>>()?;
    let m = CostMatrix::from_fn(n, |a, b| geo::haversine_m(pts[a], pts[b]))?;
    let tour = tsp::two_opt(&m, &initial_order(&m, opts.tour_init))?;
    straight_mission(scene, PlanMode::TspEuclid, &tour.order)
}

pub fn plan_astar_seq(scene: &Scene) -> Result<Mission, PlanError> {
    let ctx = PlanningContext::new(scene)?;
    plan_astar_seq_in(&ctx)
}

pub fn plan_astar_seq_in(ctx: &PlanningContext<'_>) -> Result<Mission, PlanError> {
    let tour: Vec<usize> = (0..ctx.scene.node_count()).collect();
    stitched_mission(ctx, PlanMode::AstarSeq, &tour, |a, b| ctx.search_leg(a, b))
}

pub fn plan_hybrid(scene: &Scene) -> Result<Mission, PlanError> {
    plan_hybrid_with(scene, &PlanOptions::default())
}

pub fn plan_hybrid_with(scene: &Scene, opts: &PlanOptions) -> Result<Mission, PlanError> {
    let ctx = PlanningContext::new(scene)?;
    plan_hybrid_in(&ctx, opts)
}

pub fn plan_hybrid_in(ctx: &PlanningContext<'_>, opts: &PlanOptions) -> Result<Mission, PlanError> {
    let (m, cache) = build_cost_matrix(ctx)?;
    let tour = tsp::two_opt(&m, &initial_order(&m, opts.tour_init))?;
    stitched_mission(ctx, PlanMode::Hybrid, &tour.order, |a, b| {
        Ok(cache.get(a, b).expect("every ordered pair is cached").clone())
    })
}

/// Dispatches on `mode`.
pub fn plan(scene: &Scene, mode: PlanMode, opts: &PlanOptions) -> Result<Mission, PlanError> {
    match mode {
        PlanMode::TspEuclid => plan_tsp_euclid_with(scene, opts),
        PlanMode::AstarSeq => plan_astar_seq(scene),
        PlanMode::Hybrid => plan_hybrid_with(scene, opts),
        PlanMode::InputOrder => plan_input_order(scene),
    }
}
