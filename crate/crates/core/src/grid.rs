//! Uniform occupancy grid over an image.
//!
//! Cells are `cell_size_px` squares indexed by `(i, j)` = (row, column). A
//! cell is blocked when its closed footprint touches any obstacle; the blocked
//! set can then be dilated by a Chebyshev margin.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::PixelPoint;

pub const DEFAULT_CELL_SIZE_PX: u32 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),
    #[error("point ({x}, {y}) lies outside the {width}x{height} px image")]
    PointOutOfBounds { x: f64, y: f64, width: u32, height: u32 },
    #[error("cell ({i}, {j}) outside {rows}x{cols} grid")]
    CellOutOfRange {
        i: usize,
        j: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid obstacle: {0}")]
    InvalidObstacle(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cell_size_px: u32,
    pub width_px: u32,
    pub height_px: u32,
}

impl GridSpec {
    pub fn new(cell_size_px: u32, width_px: u32, height_px: u32) -> Result<Self, GridError> {
        let spec = Self {
            cell_size_px,
            width_px,
            height_px,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.cell_size_px < 1 {
            return Err(GridError::InvalidSpec("cell_size_px must be >= 1".into()));
        }
        if self.width_px < self.cell_size_px || self.height_px < self.cell_size_px {
            return Err(GridError::InvalidSpec(format!(
                "image {}x{} px smaller than one {} px cell",
                self.width_px, self.height_px, self.cell_size_px
            )));
        }
        Ok(())
    }

    pub fn cols(&self) -> usize {
        self.width_px.div_ceil(self.cell_size_px) as usize
    }

    pub fn rows(&self) -> usize {
        self.height_px.div_ceil(self.cell_size_px) as usize
    }

    pub fn contains_point(&self, p: PixelPoint) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x < self.width_px as f64 && p.y < self.height_px as f64
    }

    pub fn contains_cell(&self, c: CellIndex) -> bool {
        c.i < self.rows() && c.j < self.cols()
    }

    pub fn cell_of(&self, p: PixelPoint) -> Result<CellIndex, GridError> {
        if !self.contains_point(p) {
            return Err(GridError::PointOutOfBounds {
                x: p.x,
                y: p.y,
                width: self.width_px,
                height: self.height_px,
            });
        }
        let s = self.cell_size_px as f64;
        Ok(CellIndex {
            i: (p.y / s).floor() as usize,
            j: (p.x / s).floor() as usize,
        })
    }

    pub fn center_of(&self, c: CellIndex) -> Result<PixelPoint, GridError> {
        if !self.contains_cell(c) {
            return Err(self.out_of_range(c));
        }
        let s = self.cell_size_px as f64;
        Ok(PixelPoint::new((c.j as f64 + 0.5) * s, (c.i as f64 + 0.5) * s))
    }

    /// Closed pixel footprint `(x0, y0, x1, y1)` of a cell.
    pub fn cell_bounds(&self, c: CellIndex) -> (f64, f64, f64, f64) {
        let s = self.cell_size_px as f64;
        let (x0, y0) = (c.j as f64 * s, c.i as f64 * s);
        (x0, y0, x0 + s, y0 + s)
    }

    fn out_of_range(&self, c: CellIndex) -> GridError {
        GridError::CellOutOfRange {
            i: c.i,
            j: c.j,
            rows: self.rows(),
            cols: self.cols(),
        }
    }
}

/// Row `i`, column `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub i: usize,
    pub j: usize,
}

impl CellIndex {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

impl std::fmt::Display for CellIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// An obstacle footprint in pixel space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Obstacle {
    /// Simple polygon, implicitly closed.
    Polygon {
        vertices: Vec<PixelPoint>,
    },
    Disc {
        center: PixelPoint,
        radius_px: f64,
    },
}

impl Obstacle {
    pub fn validate(&self) -> Result<(), GridError> {
        match self {
            Obstacle::Disc { center, radius_px } => {
                if !center.is_finite() {
                    return Err(GridError::InvalidObstacle("disc center not finite".into()));
                }
                if !(radius_px.is_finite() && *radius_px > 0.0) {
                    return Err(GridError::InvalidObstacle(format!(
                        "disc radius must be > 0, got {radius_px}"
                    )));
                }
            }
            Obstacle::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(GridError::InvalidObstacle(format!(
                        "polygon needs >= 3 vertices, got {}",
                        vertices.len()
                    )));
                }
                if vertices.iter().any(|v| !v.is_finite()) {
                    return Err(GridError::InvalidObstacle("polygon vertex not finite".into()));
                }
                if !polygon_is_simple(vertices) {
                    return Err(GridError::InvalidObstacle("polygon is self-intersecting".into()));
                }
            }
        }
        Ok(())
    }

    /// Pixel bounding box `(x0, y0, x1, y1)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        match self {
            Obstacle::Disc { center, radius_px } => (
                center.x - radius_px,
                center.y - radius_px,
                center.x + radius_px,
                center.y + radius_px,
            ),
            Obstacle::Polygon { vertices } => vertices.iter().fold(
                (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
                |(x0, y0, x1, y1), v| (x0.min(v.x), y0.min(v.y), x1.max(v.x), y1.max(v.y)),
            ),
        }
    }

    /// Whether the closed axis-aligned rectangle touches this obstacle.
    pub fn intersects_rect(&self, rect: (f64, f64, f64, f64)) -> bool {
        let (x0, y0, x1, y1) = rect;
        match self {
            Obstacle::Disc { center, radius_px } => {
                let dx = center.x - center.x.clamp(x0, x1);
                let dy = center.y - center.y.clamp(y0, y1);
                dx * dx + dy * dy <= radius_px * radius_px
            }
            Obstacle::Polygon { vertices } => {
                let n = vertices.len();
                let edge_hits = (0..n).any(|k| {
                    let a = vertices[k];
                    let b = vertices[(k + 1) % n];
                    segment_touches_rect(a, b, rect)
                });
                // Either an edge enters the rectangle or the rectangle lies wholly inside.
                edge_hits || point_in_polygon(PixelPoint::new(x0, y0), vertices)
            }
        }
    }
}

/// Liang–Barsky clip of segment `a→b` against a closed rectangle.
fn segment_touches_rect(a: PixelPoint, b: PixelPoint, rect: (f64, f64, f64, f64)) -> bool {
    let (x0, y0, x1, y1) = rect;
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [(-dx, a.x - x0), (dx, x1 - a.x), (-dy, a.y - y0), (dy, y1 - a.y)] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Even-odd ray cast. Points exactly on the boundary may go either way.
pub(crate) fn point_in_polygon(p: PixelPoint, vertices: &[PixelPoint]) -> bool {
    let n = vertices.len();
    let mut inside = false;
    let mut k = n - 1;
    for m in 0..n {
        let (a, b) = (vertices[m], vertices[k]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        k = m;
    }
    inside
}

fn orient(a: PixelPoint, b: PixelPoint, c: PixelPoint) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: PixelPoint, b: PixelPoint, p: PixelPoint) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(a: PixelPoint, b: PixelPoint, c: PixelPoint, d: PixelPoint) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// No two non-adjacent edges meet and no vertex repeats.
pub fn polygon_is_simple(vertices: &[PixelPoint]) -> bool {
    let n = vertices.len();
    if n < 3 {
        return false;
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if vertices[a] == vertices[b] {
                return false;
            }
        }
    }
    for a in 0..n {
        let (p1, p2) = (vertices[a], vertices[(a + 1) % n]);
        for b in (a + 1)..n {
            let adjacent = b == a + 1 || (a == 0 && b == n - 1);
            if adjacent {
                continue;
            }
            let (q1, q2) = (vertices[b], vertices[(b + 1) % n]);
            if segments_intersect(p1, p2, q1, q2) {
                return false;
            }
        }
    }
    // A zero-area polygon (all collinear) is degenerate.
    let area2: f64 = (0..n)
        .map(|k| {
            let (a, b) = (vertices[k], vertices[(k + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum();
    area2 != 0.0
}

/// Immutable traversability field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyGrid {
    spec: GridSpec,
    blocked: Vec<bool>,
}

impl OccupancyGrid {
    /// All cells traversable.
    pub fn empty(spec: GridSpec) -> Self {
        Self {
            blocked: vec![false; spec.rows() * spec.cols()],
            spec,
        }
    }

    /// Builds a grid from an explicit row-major blocked mask.
    pub fn from_blocked(spec: GridSpec, blocked: Vec<bool>) -> Result<Self, GridError> {
        if blocked.len() != spec.rows() * spec.cols() {
            return Err(GridError::InvalidSpec(format!(
                "mask has {} cells, grid has {}",
                blocked.len(),
                spec.rows() * spec.cols()
            )));
        }
        Ok(Self { spec, blocked })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn rows(&self) -> usize {
        self.spec.rows()
    }

    pub fn cols(&self) -> usize {
        self.spec.cols()
    }

    pub fn cell_count(&self) -> usize {
        self.blocked.len()
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    pub fn is_blocked(&self, c: CellIndex) -> bool {
        !self.is_traversable(c)
    }

    /// False for out-of-range cells.
    pub fn is_traversable(&self, c: CellIndex) -> bool {
        self.spec.contains_cell(c) && !self.blocked[c.i * self.cols() + c.j]
    }

    /// Traversability of a signed index; negative or out-of-range is false.
    pub fn is_traversable_signed(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && self.is_traversable(CellIndex::new(i as usize, j as usize))
    }

    pub fn blocked_mask(&self) -> &[bool] {
        &self.blocked
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        let cols = self.cols();
        (0..self.cell_count()).map(move |k| CellIndex::new(k / cols, k % cols))
    }

    fn dilate(&mut self, margin: usize) {
        if margin == 0 {
            return;
        }
        let (rows, cols) = (self.rows(), self.cols());
        let src = self.blocked.clone();
        for i in 0..rows {
            for j in 0..cols {
                if !src[i * cols + j] {
                    continue;
                }
                let (i0, i1) = (i.saturating_sub(margin), (i + margin).min(rows - 1));
                let (j0, j1) = (j.saturating_sub(margin), (j + margin).min(cols - 1));
                for ii in i0..=i1 {
                    self.blocked[ii * cols + j0..=ii * cols + j1].fill(true);
                }
            }
        }
    }
}

/// Rasterizes obstacles: a cell is blocked iff its closed square touches an
/// obstacle, then the blocked set is dilated by `margin_cells` (Chebyshev).
pub fn build_grid(spec: GridSpec, obstacles: &[Obstacle], margin_cells: usize) -> OccupancyGrid {
    let mut grid = OccupancyGrid::empty(spec);
    let (rows, cols) = (spec.rows(), spec.cols());
    let s = spec.cell_size_px as f64;
    for obstacle in obstacles {
        let (x0, y0, x1, y1) = obstacle.bounds();
        if x1 < 0.0 || y1 < 0.0 {
            continue;
        }
        // Cells whose closed footprint can touch the bounding box.
        let j_lo = ((x0 / s).floor() - 1.0).max(0.0) as usize;
        let i_lo = ((y0 / s).floor() - 1.0).max(0.0) as usize;
        let j_hi = ((x1 / s).floor().max(0.0) as usize).min(cols - 1);
        let i_hi = ((y1 / s).floor().max(0.0) as usize).min(rows - 1);
        if j_lo > j_hi || i_lo > i_hi {
            continue;
        }
        for i in i_lo..=i_hi {
            for j in j_lo..=j_hi {
                let k = i * cols + j;
                if !grid.blocked[k] && obstacle.intersects_rect(spec.cell_bounds(CellIndex::new(i, j))) {
                    grid.blocked[k] = true;
                }
            }
        }
    }
    grid.dilate(margin_cells);
    grid
}
