//! Independent oracles used by the integration and acceptance suites. None of
//! these call into the code paths they check.

#![allow(dead_code)]

use std::collections::BinaryHeap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavplan::geo::GeoPoint;
use uavplan::grid::{CellIndex, GridSpec, Obstacle, OccupancyGrid};
use uavplan::tsp::CostMatrix;

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }
}

/// Random `rows x cols` grid (1 px cells) with each cell blocked with probability `p`.
pub fn random_grid(rng: &mut Rng, rows: usize, cols: usize, p: f64) -> OccupancyGrid {
    let spec = GridSpec::new(1, cols as u32, rows as u32).unwrap();
    let mask = (0..rows * cols).map(|_| rng.unit() < p).collect();
    OccupancyGrid::from_blocked(spec, mask).unwrap()
}

pub fn random_free_cell(rng: &mut Rng, g: &OccupancyGrid) -> CellIndex {
    loop {
        let c = CellIndex::new(rng.below(g.rows()), rng.below(g.cols()));
        if g.is_traversable(c) {
            return c;
        }
    }
}

fn free(g: &OccupancyGrid, i: isize, j: isize) -> bool {
    i >= 0 && j >= 0 && g.is_traversable(CellIndex::new(i as usize, j as usize))
}

/// Plain Dijkstra over the same move rules (8-connected, no corner cutting).
/// Costs are tracked as exact (orthogonal, diagonal) counts; ordering uses
/// their f64 value, which separates distinct counts at these grid sizes.
/// Returns `(orthogonal, diagonal, expanded)` or `None` when unreachable.
pub fn dijkstra(g: &OccupancyGrid, s: CellIndex, t: CellIndex) -> (Option<(u64, u64)>, usize) {
    #[derive(PartialEq)]
    struct Item(f64, u64, u64, usize);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0)
        }
    }
    let cols = g.cols();
    let mut best = vec![f64::INFINITY; g.cell_count()];
    let mut done = vec![false; g.cell_count()];
    let mut heap = BinaryHeap::new();
    let k0 = s.i * cols + s.j;
    best[k0] = 0.0;
    heap.push(Item(0.0, 0, 0, k0));
    let mut expanded = 0;
    while let Some(Item(d, a, b, k)) = heap.pop() {
        if done[k] {
            continue;
        }
        done[k] = true;
        expanded += 1;
        let (i, j) = ((k / cols) as isize, (k % cols) as isize);
        if (i as usize, j as usize) == (t.i, t.j) {
            return (Some((a, b)), expanded);
        }
        for di in -1isize..=1 {
            for dj in -1isize..=1 {
                if (di, dj) == (0, 0) || !free(g, i + di, j + dj) {
                    continue;
                }
                let diag = di != 0 && dj != 0;
                if diag && !(free(g, i + di, j) && free(g, i, j + dj)) {
                    continue;
                }
                let (na, nb) = if diag { (a, b + 1) } else { (a + 1, b) };
                let nd = na as f64 + nb as f64 * std::f64::consts::SQRT_2;
                let nk = ((i + di) as usize) * cols + (j + dj) as usize;
                if nd < best[nk] - 1e-12 {
                    best[nk] = nd;
                    heap.push(Item(nd, na, nb, nk));
                }
            }
        }
        let _ = d;
    }
    (None, expanded)
}

pub fn euclid_matrix(pts: &[(f64, f64)]) -> CostMatrix {
    CostMatrix::from_fn(pts.len(), |a, b| {
        let (p, q) = (pts[a], pts[b]);
        (p.0 - q.0).hypot(p.1 - q.1)
    })
    .unwrap()
}

pub fn random_points(rng: &mut Rng, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| (rng.range(0.0, 100.0), rng.range(0.0, 100.0)))
        .collect()
}

pub fn closed_len(m: &CostMatrix, order: &[usize]) -> f64 {
    (0..order.len())
        .map(|k| m.get(order[k], order[(k + 1) % order.len()]))
        .sum()
}

/// Exhaustive closed-tour optimum with node 0 fixed, via Heap's algorithm.
pub fn brute_force_len(m: &CostMatrix) -> f64 {
    let n = m.n();
    if n <= 3 {
        return closed_len(m, &(0..n).collect::<Vec<_>>());
    }
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = f64::INFINITY;
    let mut c = vec![0usize; rest.len()];
    let eval = |rest: &[usize]| {
        let mut o = vec![0];
        o.extend_from_slice(rest);
        closed_len(m, &o)
    };
    best = best.min(eval(&rest));
    let mut i = 0;
    while i < rest.len() {
        if c[i] < i {
            if i % 2 == 0 {
                rest.swap(0, i);
            } else {
                rest.swap(c[i], i);
            }
            best = best.min(eval(&rest));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// True if no segment reversal of positions `i..=k` (1 <= i < k <= n-1)
/// shortens the closed tour by more than `eps`, measured by full recomputation.
pub fn is_two_opt_local_min(m: &CostMatrix, order: &[usize], eps: f64) -> bool {
    let base = closed_len(m, order);
    let n = order.len();
    for i in 1..n {
        for k in (i + 1)..n {
            let mut t = order.to_vec();
            t[i..=k].reverse();
            if closed_len(m, &t) < base - eps {
                return false;
            }
        }
    }
    true
}

/// Independent greedy trace: repeatedly take the strictly nearest unvisited node.
pub fn greedy_trace(m: &CostMatrix) -> Vec<usize> {
    let n = m.n();
    let mut left: Vec<usize> = (1..n).collect();
    let mut out = vec![0];
    while !left.is_empty() {
        let cur = *out.last().unwrap();
        let (pos, _) = left
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bp, bd), (p, &v)| {
                let d = m.get(cur, v);
                if d < bd {
                    (p, d)
                } else {
                    (bp, bd)
                }
            });
        out.push(left.remove(pos));
    }
    out
}

/// Haversine with R = 6371008.8 m in the atan2 form.
pub fn haversine(a: GeoPoint, b: GeoPoint) -> f64 {
    let r = 6371008.8f64;
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dl = (b.lon - a.lon).to_radians();
    let h = ((p2 - p1) / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * r * h.sqrt().atan2((1.0 - h).sqrt())
}

pub fn knn_brute(gen: &[GeoPoint], reference: &[GeoPoint]) -> f64 {
    let mut acc = 0.0;
    for &g in gen {
        let mut best = f64::INFINITY;
        for &r in reference {
            let d = haversine(g, r);
            if d * d < best {
                best = d * d;
            }
        }
        acc += best;
    }
    (acc / gen.len() as f64).sqrt()
}

/// Enumerates every monotone warping path from (0,0) to (n-1,m-1); returns
/// sqrt(cost/len) of the cheapest, shortest among ties within 1e-9 relative.
pub fn dtw_brute(a: &[GeoPoint], b: &[GeoPoint]) -> f64 {
    fn walk(
        a: &[GeoPoint],
        b: &[GeoPoint],
        i: usize,
        j: usize,
        cost: f64,
        len: usize,
        best: &mut (f64, usize),
    ) {
        let d = haversine(a[i], b[j]);
        let cost = cost + d * d;
        let len = len + 1;
        if i + 1 == a.len() && j + 1 == b.len() {
            let tie = (cost - best.0).abs() <= 1e-9 * best.0.max(1.0);
            if (cost < best.0 && !tie) || (tie && len < best.1) {
                *best = (cost, len);
            }
            return;
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, cost, len, best);
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, cost, len, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, cost, len, best);
        }
    }
    let mut best = (f64::INFINITY, usize::MAX);
    walk(a, b, 0, 0, 0.0, 0, &mut best);
    (best.0 / best.1 as f64).sqrt()
}

/// Second implementation of arc-length resampling via an explicit cumulative
/// table and binary search, then index-paired RMSE.
pub fn sequential_oracle(a: &[GeoPoint], b: &[GeoPoint], m: usize) -> f64 {
    fn resample(p: &[GeoPoint], m: usize) -> Vec<GeoPoint> {
        let mut table = vec![0.0];
        for w in p.windows(2) {
            table.push(table.last().unwrap() + haversine(w[0], w[1]));
        }
        let total = *table.last().unwrap();
        (0..m)
            .map(|k| {
                if total == 0.0 {
                    return p[0];
                }
                if k == m - 1 {
                    return *p.last().unwrap();
                }
                let s = total * k as f64 / (m - 1) as f64;
                // first vertex index whose cumulative length is >= s
                let hi = table.partition_point(|&c| c < s).clamp(1, p.len() - 1);
                let lo = hi - 1;
                let span = table[hi] - table[lo];
                let f = if span > 0.0 { (s - table[lo]) / span } else { 0.0 };
                GeoPoint {
                    lat: p[lo].lat + f * (p[hi].lat - p[lo].lat),
                    lon: p[lo].lon + f * (p[hi].lon - p[lo].lon),
                }
            })
            .collect()
    }
    let (ra, rb) = (resample(a, m), resample(b, m));
    let s: f64 = ra.iter().zip(&rb).map(|(&x, &y)| haversine(x, y).powi(2)).sum();
    (s / m as f64).sqrt()
}

pub fn random_geo_traj(rng: &mut Rng, n: usize) -> Vec<GeoPoint> {
    (0..n)
        .map(|_| GeoPoint::new(40.0 + rng.range(0.0, 0.01), -100.0 + rng.range(0.0, 0.01)).unwrap())
        .collect()
}

fn seg_cross(p: (f64, f64), q: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let orient =
        |o: (f64, f64), u: (f64, f64), v: (f64, f64)| (u.0 - o.0) * (v.1 - o.1) - (u.1 - o.1) * (v.0 - o.0);
    let on = |o: (f64, f64), u: (f64, f64), v: (f64, f64)| {
        v.0 >= o.0.min(u.0) && v.0 <= o.0.max(u.0) && v.1 >= o.1.min(u.1) && v.1 <= o.1.max(u.1)
    };
    let (d1, d2, d3, d4) = (orient(a, b, p), orient(a, b, q), orient(p, q, a), orient(p, q, b));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on(a, b, p))
        || (d2 == 0.0 && on(a, b, q))
        || (d3 == 0.0 && on(p, q, a))
        || (d4 == 0.0 && on(p, q, b))
}

fn inside(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    let mut c = false;
    let n = poly.len();
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if (a.1 > p.1) != (b.1 > p.1) && p.0 < a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1) {
            c = !c;
        }
    }
    c
}

/// Exact test of whether the closed square of `cell` touches `obstacle`:
/// disc by clamped distance, polygon by vertex containment both ways plus
/// edge crossings.
pub fn cell_touches(spec: &GridSpec, cell: CellIndex, obstacle: &Obstacle) -> bool {
    let c = spec.cell_size_px as f64;
    let (x0, y0, x1, y1) = (
        cell.j as f64 * c,
        cell.i as f64 * c,
        (cell.j + 1) as f64 * c,
        (cell.i + 1) as f64 * c,
    );
    match obstacle {
        Obstacle::Disc { center, radius_px } => {
            let dx = center.x - center.x.clamp(x0, x1);
            let dy = center.y - center.y.clamp(y0, y1);
            dx * dx + dy * dy <= radius_px * radius_px
        }
        Obstacle::Polygon { vertices } => {
            let poly: Vec<(f64, f64)> = vertices.iter().map(|v| (v.x, v.y)).collect();
            let sq = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
            if poly
                .iter()
                .any(|&(x, y)| x >= x0 && x <= x1 && y >= y0 && y <= y1)
            {
                return true;
            }
            if sq.iter().any(|&p| inside(&poly, p)) {
                return true;
            }
            (0..poly.len()).any(|k| {
                let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
                (0..4).any(|e| seg_cross(a, b, sq[e], sq[(e + 1) % 4]))
            })
        }
    }
}
