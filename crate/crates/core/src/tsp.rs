//! Closed-tour TSP over a symmetric cost matrix with a fixed depot (node 0).
//!
//! [`two_opt`] is best-improvement 2-opt: each sweep scans every pair of
//! non-adjacent tour edges, applies the single best segment reversal, and
//! stops once no move gains more than [`IMPROVEMENT_EPS`]. Reversals only touch
//! positions `1..n`, so the depot stays first.

use thiserror::Error;

/// Minimum gain (meters) for a 2-opt move to count as an improvement.
pub const IMPROVEMENT_EPS: f64 = 1e-9;

/// Largest instance [`brute_force_tsp`] accepts.
pub const BRUTE_FORCE_MAX_N: usize = 11;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TspError {
    #[error("cost matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("brute force refused for n = {0} (max {BRUTE_FORCE_MAX_N})")]
    TooLarge(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    costs: Vec<f64>,
}

impl CostMatrix {
    /// Validates symmetry (1e-9), zero diagonal, and finite non-negative entries.
    pub fn new(n: usize, costs: Vec<f64>) -> Result<Self, TspError> {
        if costs.len() != n * n {
            return Err(TspError::InvalidMatrix(format!(
                "expected {} entries, got {}",
                n * n,
                costs.len()
            )));
        }
        for a in 0..n {
            if costs[a * n + a] != 0.0 {
                return Err(TspError::InvalidMatrix(format!("diagonal entry {a} is not zero")));
            }
            for b in 0..n {
                let v = costs[a * n + b];
                if !v.is_finite() || v < 0.0 {
                    return Err(TspError::InvalidMatrix(format!("entry ({a}, {b}) = {v}")));
                }
                if (v - costs[b * n + a]).abs() > 1e-9 {
                    return Err(TspError::InvalidMatrix(format!("asymmetric at ({a}, {b})")));
                }
            }
        }
        Ok(Self { n, costs })
    }

    /// Builds a matrix from a cost function evaluated on the upper triangle
    /// and mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, TspError> {
        let mut costs = vec![0.0; n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let v = f(a, b);
                costs[a * n + b] = v;
                costs[b * n + a] = v;
            }
        }
        Self::new(n, costs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.costs[a * self.n + b]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length_m: f64,
}

fn check_permutation(n: usize, order: &[usize]) -> Result<(), TspError> {
    if order.len() != n {
        return Err(TspError::InvalidPermutation(format!(
            "length {} for {n} nodes",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n {
            return Err(TspError::InvalidPermutation(format!("node {v} out of range")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(TspError::InvalidPermutation(format!("node {v} repeated")));
        }
    }
    Ok(())
}

fn closed_length(m: &CostMatrix, order: &[usize]) -> f64 {
    let n = order.len();
    if n < 2 {
        return 0.0;
    }
    let mut len = 0.0;
    for k in 0..n {
        len += m.get(order[k], order[(k + 1) % n]);
    }
    len
}

/// Closed-tour length including the edge back to the first node.
pub fn tour_length(m: &CostMatrix, order: &[usize]) -> Result<f64, TspError> {
    check_permutation(m.n(), order)?;
    Ok(closed_length(m, order))
}

/// Best-improvement 2-opt from `initial` (depot first).
pub fn two_opt(m: &CostMatrix, initial: &[usize]) -> Result<Tour, TspError> {
    check_permutation(m.n(), initial)?;
    if initial.first().is_some_and(|&d| d != 0) {
        return Err(TspError::InvalidPermutation(
            "depot (node 0) must be first".into(),
        ));
    }
    let n = initial.len();
    let mut t = initial.to_vec();
    loop {
        let mut best: Option<(usize, usize)> = None;
        let mut best_delta = -IMPROVEMENT_EPS;
        for i in 0..n.saturating_sub(2) {
            let (a, b) = (t[i], t[i + 1]);
            for k in (i + 2)..n {
                if i == 0 && k == n - 1 {
                    // edges (0,1) and (n-1,0) share the depot
                    continue;
                }
                let (c, d) = (t[k], t[(k + 1) % n]);
                let delta = m.get(a, c) + m.get(b, d) - m.get(a, b) - m.get(c, d);
                if delta < best_delta {
                    best_delta = delta;
                    best = Some((i, k));
                }
            }
        }
        match best {
            Some((i, k)) => t[i + 1..=k].reverse(),
            None => break,
        }
    }
    let length_m = closed_length(m, &t);
    Ok(Tour { order: t, length_m })
}

/// Greedy tour from the depot; ties go to the lowest index.
pub fn nearest_neighbor_init(m: &CostMatrix) -> Vec<usize> {
    let n = m.n();
    if n == 0 {
        return Vec::new();
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = 0;
    visited[0] = true;
    order.push(0);
    for _ in 1..n {
        let mut next = None;
        let mut best = f64::INFINITY;
        for cand in (0..n).filter(|&c| !visited[c]) {
            if m.get(cur, cand) < best {
                best = m.get(cur, cand);
                next = Some(cand);
            }
        }
        let next = next.expect("an unvisited node remains");
        visited[next] = true;
        order.push(next);
        cur = next;
    }
    order
}

/// Exhaustive optimum with the depot fixed first. The first optimal order in
/// lexicographic enumeration wins.
pub fn brute_force_tsp(m: &CostMatrix) -> Result<Tour, TspError> {
    let n = m.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(TspError::TooLarge(n));
    }
    if n <= 3 {
        let order: Vec<usize> = (0..n).collect();
        let length_m = closed_length(m, &order);
        return Ok(Tour { order, length_m });
    }
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = Tour {
        order: Vec::new(),
        length_m: f64::INFINITY,
    };
    let mut order = vec![0; n];
    loop {
        order[1..].copy_from_slice(&rest);
        let len = closed_length(m, &order);
        if len < best.length_m {
            best = Tour {
                order: order.clone(),
                length_m: len,
            };
        }
        if !next_permutation(&mut rest) {
            break;
        }
    }
    Ok(best)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn euclid(points: &[(f64, f64)]) -> CostMatrix {
        CostMatrix::from_fn(points.len(), |a, b| {
            let (p, q) = (points[a], points[b]);
            (p.0 - q.0).hypot(p.1 - q.1)
        })
        .unwrap()
    }

    #[test]
    fn tour_length_examples() {
        let m1 = CostMatrix::new(1, vec![0.0]).unwrap();
        assert_eq!(tour_length(&m1, &[0]).unwrap(), 0.0);
        let m2 = CostMatrix::new(2, vec![0.0, 3.5, 3.5, 0.0]).unwrap();
        assert_eq!(tour_length(&m2, &[0, 1]).unwrap(), 7.0);
        let sq = euclid(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(tour_length(&sq, &[0, 1, 2, 3]).unwrap(), 4.0);
        assert!(tour_length(&sq, &[0, 1, 1, 3]).is_err());
        assert!(tour_length(&sq, &[0, 1, 2]).is_err());
        assert!(tour_length(&sq, &[0, 1, 2, 7]).is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(CostMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(CostMatrix::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(CostMatrix::new(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(CostMatrix::new(2, vec![0.0, f64::NAN, f64::NAN, 0.0]).is_err());
        assert!(CostMatrix::new(2, vec![0.0]).is_err());
    }

    #[test]
    fn small_instances_unchanged() {
        let m = euclid(&[(0.0, 0.0), (5.0, 1.0), (2.0, 7.0)]);
        for init in [vec![0], vec![0, 1], vec![0, 1, 2], vec![0, 2, 1]] {
            let sub = if init.len() == 3 {
                m.clone()
            } else {
                CostMatrix::from_fn(init.len(), |a, b| m.get(a, b)).unwrap()
            };
            assert_eq!(two_opt(&sub, &init).unwrap().order, init);
        }
    }

    #[test]
    fn crossing_square_is_uncrossed() {
        let sq = euclid(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let t = two_opt(&sq, &[0, 2, 1, 3]).unwrap();
        assert_eq!(t.length_m, 4.0);
        assert_eq!(t.order[0], 0);
        assert_eq!(brute_force_tsp(&sq).unwrap().length_m, 4.0);
    }

    #[test]
    fn depot_must_be_first() {
        let sq = euclid(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert!(two_opt(&sq, &[1, 0, 2, 3]).is_err());
    }

    #[test]
    fn nearest_neighbor_examples() {
        let m2 = euclid(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(nearest_neighbor_init(&m2), vec![0, 1]);
        let line = euclid(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        assert_eq!(nearest_neighbor_init(&line), vec![0, 1, 2, 3]);
        // equidistant: lowest index wins
        let tie = euclid(&[(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)]);
        assert_eq!(nearest_neighbor_init(&tie), vec![0, 1, 2]);
    }

    #[test]
    fn brute_force_small() {
        let m = euclid(&[(0.0, 0.0), (5.0, 1.0), (2.0, 7.0)]);
        let t = brute_force_tsp(&m).unwrap();
        assert_eq!(t.order, vec![0, 1, 2]);
        let big = CostMatrix::new(12, {
            let mut v = vec![1.0; 144];
            for k in 0..12 {
                v[k * 12 + k] = 0.0;
            }
            v
        })
        .unwrap();
        assert_eq!(brute_force_tsp(&big), Err(TspError::TooLarge(12)));
    }

    proptest! {
        #[test]
        fn two_opt_invariants(pts in proptest::collection::vec((0.0..100.0f64, 0.0..100.0f64), 1..9)) {
            let m = euclid(&pts);
            let init: Vec<usize> = (0..pts.len()).collect();
            let t = two_opt(&m, &init).unwrap();
            prop_assert_eq!(t.order[0], 0);
            let mut sorted = t.order.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, init.clone());
            prop_assert!(t.length_m <= tour_length(&m, &init).unwrap() + 1e-9);
            prop_assert!(t.length_m >= brute_force_tsp(&m).unwrap().length_m - 1e-9);
            prop_assert_eq!(two_opt(&m, &init).unwrap(), t);
        }
    }
}
