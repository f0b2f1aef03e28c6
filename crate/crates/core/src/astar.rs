//! 8-connected A* over an [`OccupancyGrid`].
//!
//! Step costs are 1 (orthogonal) and √2 (diagonal). Path costs are kept as
//! exact counts of each step kind ([`StepCost`]) so that comparisons, tie
//! breaking and the final cost are identical on every platform and equal the
//! Dijkstra optimum bit-for-bit.
//!
//! Diagonal moves may not cut corners: `(i,j)→(i±1,j±1)` needs both
//! `(i±1,j)` and `(i,j±1)` traversable.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::grid::{CellIndex, OccupancyGrid};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AstarError {
    #[error("endpoint {0} is blocked or outside the grid")]
    InvalidEndpoint(CellIndex),
    #[error("no path from {start} to {goal}")]
    NoPath { start: CellIndex, goal: CellIndex },
}

/// `orthogonal + diagonal·√2`, compared exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct StepCost {
    pub orthogonal: u64,
    pub diagonal: u64,
}

impl StepCost {
    pub const ZERO: StepCost = StepCost {
        orthogonal: 0,
        diagonal: 0,
    };
    pub const ORTHOGONAL: StepCost = StepCost {
        orthogonal: 1,
        diagonal: 0,
    };
    pub const DIAGONAL: StepCost = StepCost {
        orthogonal: 0,
        diagonal: 1,
    };

    pub fn value(&self) -> f64 {
        self.orthogonal as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }
}

impl std::ops::Add for StepCost {
    type Output = StepCost;
    fn add(self, rhs: StepCost) -> StepCost {
        StepCost {
            orthogonal: self.orthogonal + rhs.orthogonal,
            diagonal: self.diagonal + rhs.diagonal,
        }
    }
}

impl Ord for StepCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of da + db·√2
        let da = self.orthogonal as i128 - other.orthogonal as i128;
        let db = self.diagonal as i128 - other.diagonal as i128;
        match (da.signum(), db.signum()) {
            (0, 0) => Ordering::Equal,
            (a, b) if a >= 0 && b >= 0 => Ordering::Greater,
            (a, b) if a <= 0 && b <= 0 => Ordering::Less,
            // opposite signs: compare da² with 2·db²
            (1, _) => (da * da).cmp(&(2 * db * db)),
            _ => (2 * db * db).cmp(&(da * da)),
        }
    }
}

impl PartialOrd for StepCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellPath {
    pub cells: Vec<CellIndex>,
    pub steps: StepCost,
    /// Cost in cell units.
    pub cost: f64,
}

impl CellPath {
    fn from_cells(cells: Vec<CellIndex>) -> Self {
        let steps = cells
            .windows(2)
            .map(|w| step_cost(w[0], w[1]))
            .fold(StepCost::ZERO, |a, b| a + b);
        Self {
            cells,
            cost: steps.value(),
            steps,
        }
    }

    pub fn start(&self) -> CellIndex {
        self.cells[0]
    }

    pub fn goal(&self) -> CellIndex {
        *self.cells.last().expect("non-empty path")
    }

    pub fn reversed(&self) -> CellPath {
        let mut cells = self.cells.clone();
        cells.reverse();
        CellPath {
            cells,
            steps: self.steps,
            cost: self.cost,
        }
    }
}

/// Measurable stand-ins for the E and V of the O(E log V) / O(V) bounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded_nodes: usize,
    pub generated_edges: usize,
    pub grid_vertices: usize,
    pub grid_edges_bound: usize,
    /// Largest open-list size seen.
    pub peak_frontier: usize,
}

fn step_cost(a: CellIndex, b: CellIndex) -> StepCost {
    if a.i != b.i && a.j != b.j {
        StepCost::DIAGONAL
    } else {
        StepCost::ORTHOGONAL
    }
}

/// Octile distance as an exact step count: `max−min` straight plus `min` diagonal.
pub fn octile(a: CellIndex, b: CellIndex) -> StepCost {
    let di = a.i.abs_diff(b.i) as u64;
    let dj = a.j.abs_diff(b.j) as u64;
    let (lo, hi) = (di.min(dj), di.max(dj));
    StepCost {
        orthogonal: hi - lo,
        diagonal: lo,
    }
}

/// Octile distance `max(dx,dy) + (√2−1)·min(dx,dy)` in cell units.
pub fn heuristic(a: CellIndex, b: CellIndex) -> f64 {
    octile(a, b).value()
}

const NEIGHBOR_OFFSETS: [(isize, isize); 8] = [
    (-1, 0),
    (1, 0),
    (0, -1),
    (0, 1),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];

/// Legal 8-connected moves out of `c`, honouring the no-corner-cutting rule.
pub fn neighbors(grid: &OccupancyGrid, c: CellIndex) -> impl Iterator<Item = (CellIndex, StepCost)> + '_ {
    let (i, j) = (c.i as isize, c.j as isize);
    NEIGHBOR_OFFSETS.iter().filter_map(move |&(di, dj)| {
        let (ni, nj) = (i + di, j + dj);
        if !grid.is_traversable_signed(ni, nj) {
            return None;
        }
        if di != 0 && dj != 0 {
            if !grid.is_traversable_signed(i + di, j) || !grid.is_traversable_signed(i, j + dj) {
                return None;
            }
            Some((CellIndex::new(ni as usize, nj as usize), StepCost::DIAGONAL))
        } else {
            Some((CellIndex::new(ni as usize, nj as usize), StepCost::ORTHOGONAL))
        }
    })
}

/// Open-list entry. Max-heap order is: smallest f, then largest g, then
/// lexicographically smallest cell.
#[derive(Debug, PartialEq, Eq)]
struct Entry {
    f: StepCost,
    g: StepCost,
    cell: CellIndex,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .cmp(&self.f)
            .then_with(|| self.g.cmp(&other.g))
            .then_with(|| Reverse(self.cell).cmp(&Reverse(other.cell)))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_PARENT: u32 = u32::MAX;

/// Minimum-cost 8-connected path from `start` to `goal`.
pub fn astar(
    grid: &OccupancyGrid,
    start: CellIndex,
    goal: CellIndex,
) -> Result<(CellPath, SearchStats), AstarError> {
    for c in [start, goal] {
        if !grid.is_traversable(c) {
            return Err(AstarError::InvalidEndpoint(c));
        }
    }
    let cols = grid.cols();
    let v = grid.cell_count();
    let index = |c: CellIndex| c.i * cols + c.j;
    let mut stats = SearchStats {
        grid_vertices: v,
        grid_edges_bound: 8 * v,
        ..SearchStats::default()
    };

    let mut g_score: Vec<Option<StepCost>> = vec![None; v];
    let mut parent: Vec<u32> = vec![NO_PARENT; v];
    let mut closed = vec![false; v];
    let mut open = BinaryHeap::new();

    g_score[index(start)] = Some(StepCost::ZERO);
    open.push(Entry {
        f: octile(start, goal),
        g: StepCost::ZERO,
        cell: start,
    });

    while let Some(Entry { g, cell, .. }) = open.pop() {
        let k = index(cell);
        if closed[k] || g_score[k] != Some(g) {
            continue;
        }
        closed[k] = true;
        stats.expanded_nodes += 1;
        if cell == goal {
            let mut cells = vec![goal];
            let mut cur = k;
            while parent[cur] != NO_PARENT {
                cur = parent[cur] as usize;
                cells.push(CellIndex::new(cur / cols, cur % cols));
            }
            cells.reverse();
            let path = CellPath::from_cells(cells);
            debug_assert_eq!(path.steps, g);
            return Ok((path, stats));
        }
        for (next, step) in neighbors(grid, cell) {
            let nk = index(next);
            if closed[nk] {
                continue;
            }
            stats.generated_edges += 1;
            let tentative = g + step;
            if g_score[nk].is_none_or(|old| tentative < old) {
                g_score[nk] = Some(tentative);
                parent[nk] = k as u32;
                open.push(Entry {
                    f: tentative + octile(next, goal),
                    g: tentative,
                    cell: next,
                });
            }
        }
        stats.peak_frontier = stats.peak_frontier.max(open.len());
    }
    Err(AstarError::NoPath { start, goal })
}

/// Drops interior cells where the travel direction does not change.
pub fn prune_collinear(path: &CellPath) -> Vec<CellIndex> {
    let cells = &path.cells;
    if cells.len() <= 2 {
        return cells.clone();
    }
    let dir = |a: CellIndex, b: CellIndex| (b.i as isize - a.i as isize, b.j as isize - a.j as isize);
    let mut out = vec![cells[0]];
    for w in cells.windows(3) {
        if dir(w[0], w[1]) != dir(w[1], w[2]) {
            out.push(w[1]);
        }
    }
    out.push(*cells.last().unwrap());
    out
}

/// Re-expands a pruned vertex list into unit steps. Each consecutive pair must
/// lie on a common row, column or diagonal.
pub fn expand_pruned(vertices: &[CellIndex]) -> Vec<CellIndex> {
    let mut out = Vec::new();
    if let Some(first) = vertices.first() {
        out.push(*first);
    }
    for w in vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        let di = (b.i as isize - a.i as isize).signum();
        let dj = (b.j as isize - a.j as isize).signum();
        let (mut i, mut j) = (a.i as isize, a.j as isize);
        while (i, j) != (b.i as isize, b.j as isize) {
            i += di;
            j += dj;
            out.push(CellIndex::new(i as usize, j as usize));
        }
    }
    out
}
