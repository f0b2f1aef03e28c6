//! Obstacle-aware UAV mission planning.
//!
//! Detections (home, targets, obstacle footprints over a georeferenced image)
//! come in as a [`planner::Scene`]; the planners turn them into a
//! [`planner::Mission`] by ordering targets with 2-opt ([`tsp`]) and routing each
//! leg with grid A* ([`astar`] over a [`grid::OccupancyGrid`]). [`metrics`]
//! compares generated plans with reference trajectories and [`scene_io`]
//! handles files and synthetic scenes.

pub mod astar;
pub mod benchmark;
pub mod cli;
pub mod geo;
pub mod grid;
pub mod metrics;
pub mod planner;
pub mod scene_io;
pub mod tsp;

pub use geo::{GeoPoint, GeoTransform, PixelPoint};
pub use grid::{CellIndex, GridSpec, Obstacle, OccupancyGrid};
pub use planner::{Mission, MissionParams, PlanMode, Scene};
