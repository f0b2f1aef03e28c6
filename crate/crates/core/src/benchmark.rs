//! Seeded multi-scene comparison of the three planners against the
//! straight-leg detection-order baseline.

use std::time::Instant;

use rayon::prelude::*;

use crate::metrics::{self, DEFAULT_SEQUENTIAL_SAMPLES};
use crate::planner::{self, Mission, PlanMode, PlanOptions, PlanningContext, Scene};
use crate::scene_io::{self, GenParams, SceneError};

/// Meters of slack allowed when checking length orderings.
pub const ORDERING_TOL_M: f64 = 1e-6;

/// Row order within each scene.
pub const MODE_ORDER: [PlanMode; 4] = [
    PlanMode::InputOrder,
    PlanMode::TspEuclid,
    PlanMode::AstarSeq,
    PlanMode::Hybrid,
];

pub const CSV_HEADER: &str = "scene,mode,length_km,knn_m,dtw_m,seq_m,plan_wall_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub scene: String,
    pub mode: PlanMode,
    pub length_km: f64,
    pub knn_m: f64,
    pub dtw_m: f64,
    pub seq_m: f64,
    /// Only recorded when timing is requested; wall time breaks byte-stable output.
    pub plan_wall_ms: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SceneOutcome {
    pub scene: Scene,
    /// Missions in [`MODE_ORDER`].
    pub missions: Vec<Mission>,
    pub rows: Vec<BenchmarkRow>,
    /// Leg cells in astar-seq and hybrid missions that are blocked or not 8-adjacent.
    pub unsafe_cells: usize,
}

impl SceneOutcome {
    pub fn mission(&self, mode: PlanMode) -> &Mission {
        let k = MODE_ORDER.iter().position(|m| *m == mode).expect("known mode");
        &self.missions[k]
    }

    pub fn hybrid_le_astar(&self) -> bool {
        self.mission(PlanMode::Hybrid).length_m <= self.mission(PlanMode::AstarSeq).length_m + ORDERING_TOL_M
    }

    pub fn hybrid_lt_astar(&self) -> bool {
        self.mission(PlanMode::Hybrid).length_m < self.mission(PlanMode::AstarSeq).length_m - ORDERING_TOL_M
    }

    pub fn tsp_le_reference(&self) -> bool {
        self.mission(PlanMode::TspEuclid).length_m
            <= self.mission(PlanMode::InputOrder).length_m + ORDERING_TOL_M
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub n_scenes: usize,
    pub gen: GenParams,
    pub samples: usize,
    pub include_pathpoints: bool,
    pub record_timing: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            n_scenes: 50,
            gen: GenParams {
                seed: 7,
                ..GenParams::default()
            },
            samples: DEFAULT_SEQUENTIAL_SAMPLES,
            include_pathpoints: false,
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub scenes: Vec<SceneOutcome>,
}

impl BenchmarkResult {
    pub fn rows(&self) -> impl Iterator<Item = &BenchmarkRow> {
        self.scenes.iter().flat_map(|s| s.rows.iter())
    }

    pub fn count(&self, f: impl Fn(&SceneOutcome) -> bool) -> usize {
        self.scenes.iter().filter(|s| f(s)).count()
    }

    pub fn ordering_violations(&self) -> usize {
        self.count(|s| !s.hybrid_le_astar()) + self.count(|s| !s.tsp_le_reference())
    }

    pub fn unsafe_cells(&self) -> usize {
        self.scenes.iter().map(|s| s.unsafe_cells).sum()
    }

    pub fn summary(&self) -> String {
        let n = self.scenes.len();
        format!(
            "scenes={n} hybrid_le_astar_seq={}/{n} hybrid_lt_astar_seq={}/{n} tsp_euclid_le_reference={}/{n} unsafe_leg_cells={} ordering_violations={}",
            self.count(SceneOutcome::hybrid_le_astar),
            self.count(SceneOutcome::hybrid_lt_astar),
            self.count(SceneOutcome::tsp_le_reference),
            self.unsafe_cells(),
            self.ordering_violations(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in self.rows() {
            let wall = r.plan_wall_ms.map(|ms| format!("{ms:.3}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{}\n",
                r.scene, r.mode, r.length_km, r.knn_m, r.dtw_m, r.seq_m, wall
            ));
        }
        out
    }

    /// `scene,mode,idx,lat,lon` for every mission item, for external plotting.
    pub fn polylines_csv(&self) -> String {
        let mut out = String::from("scene,mode,idx,lat,lon\n");
        for s in &self.scenes {
            for m in &s.missions {
                for (k, it) in m.items.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{k},{:.7},{:.7}\n",
                        s.scene.name, m.mode, it.geo.lat, it.geo.lon
                    ));
                }
            }
        }
        out
    }
}

/// Per-scene generator seed; scene `k` of a run seeded `seed`.
pub fn scene_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Counts leg cells that are blocked or do not step to an 8-neighbour.
pub fn count_unsafe_cells(scene: &Scene, mission: &Mission) -> usize {
    let grid = scene.build_grid();
    let mut bad = 0;
    for leg in &mission.legs {
        bad += leg.cells.iter().filter(|c| !grid.is_traversable(**c)).count();
        bad += leg
            .cells
            .windows(2)
            .filter(|w| w[0].i.abs_diff(w[1].i) > 1 || w[0].j.abs_diff(w[1].j) > 1 || w[0] == w[1])
            .count();
    }
    bad
}

fn evaluate_scene(scene: Scene, cfg: &BenchmarkConfig) -> Result<SceneOutcome, SceneError> {
    let opts = PlanOptions::default();
    let plan_err = |e: planner::PlanError| SceneError::Generation {
        attempts: 0,
        last: format!("{}: {e}", scene.name),
    };
    let mut missions = Vec::with_capacity(MODE_ORDER.len());
    let mut walls = Vec::with_capacity(MODE_ORDER.len());
    let ctx = PlanningContext::new(&scene).map_err(plan_err)?;
    for mode in MODE_ORDER {
        let t0 = Instant::now();
        let m = match mode {
            PlanMode::AstarSeq => planner::plan_astar_seq_in(&ctx),
            PlanMode::Hybrid => planner::plan_hybrid_in(&ctx, &opts),
            other => planner::plan(&scene, other, &opts),
        }
        .map_err(plan_err)?;
        walls.push(t0.elapsed().as_secs_f64() * 1000.0);
        missions.push(m);
    }
    let reference = scene_io::mission_trajectory(&missions[0], cfg.include_pathpoints);
    let mut rows = Vec::with_capacity(missions.len());
    for (m, wall) in missions.iter().zip(walls) {
        let gen = scene_io::mission_trajectory(m, cfg.include_pathpoints);
        let e = metrics::compare(&gen, &reference, cfg.samples).map_err(|e| SceneError::Generation {
            attempts: 0,
            last: e.to_string(),
        })?;
        rows.push(BenchmarkRow {
            scene: scene.name.clone(),
            mode: m.mode,
            length_km: m.length_m / 1000.0,
            knn_m: e.knn_m,
            dtw_m: e.dtw_m,
            seq_m: e.seq_m,
            plan_wall_ms: cfg.record_timing.then_some(wall),
        });
    }
    let unsafe_cells = [PlanMode::AstarSeq, PlanMode::Hybrid]
        .iter()
        .map(|mode| {
            let k = MODE_ORDER.iter().position(|m| m == mode).unwrap();
            count_unsafe_cells(&scene, &missions[k])
        })
        .sum();
    Ok(SceneOutcome {
        scene,
        missions,
        rows,
        unsafe_cells,
    })
}

/// Generates and plans every scene (in parallel); results keep scene order.
pub fn run(cfg: &BenchmarkConfig) -> Result<BenchmarkResult, SceneError> {
    let scenes = (0..cfg.n_scenes)
        .into_par_iter()
        .map(|k| {
            let gen = GenParams {
                seed: scene_seed(cfg.gen.seed, k),
                ..cfg.gen.clone()
            };
            let mut scene = scene_io::generate_scene(&gen)?;
            scene.name = format!("scene-{k:03}");
            evaluate_scene(scene, cfg)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BenchmarkResult { scenes })
}
