//! Trajectory comparison metrics, all in meters over haversine distances:
//!
//! * KNN RMSE: each generated point against its nearest reference point (directed gen → ref).
//! * DTW RMSE: squared-distance DTW, normalized by the warping path length.
//! * Sequential RMSE: both trajectories resampled to `m` points by arc length and paired by index.

use serde::Serialize;
use thiserror::Error;

use crate::geo::{haversine_m, polyline_length_m, GeoPoint};

pub const DEFAULT_SEQUENTIAL_SAMPLES: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("report needs at least one scene")]
    EmptyReport,
    #[error("sample count must be >= 2, got {0}")]
    TooFewSamples(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: Vec<GeoPoint>,
}

impl Trajectory {
    pub fn new(points: Vec<GeoPoint>) -> Result<Self, MetricsError> {
        if points.is_empty() {
            return Err(MetricsError::EmptyTrajectory);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length_m(&self) -> f64 {
        polyline_length_m(&self.points).unwrap_or(0.0)
    }
}

fn sq_dist(a: GeoPoint, b: GeoPoint) -> f64 {
    let d = haversine_m(a, b);
    d * d
}

pub fn knn_rmse(gen: &Trajectory, reference: &Trajectory) -> f64 {
    let total: f64 = gen
        .points
        .iter()
        .map(|&g| {
            reference
                .points
                .iter()
                .map(|&r| sq_dist(g, r))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    (total / gen.len() as f64).sqrt()
}

/// Full DTW with (match, insert, delete) steps, anchored at both ends. Among
/// equal-cost alignments the shortest warping path is used.
pub fn dtw_rmse(a: &Trajectory, b: &Trajectory) -> f64 {
    let (n, m) = (a.len(), b.len());
    // (accumulated cost, path length), row-major over (i, j)
    let mut acc: Vec<(f64, usize)> = vec![(f64::INFINITY, 0); n * m];
    for i in 0..n {
        for j in 0..m {
            let local = sq_dist(a.points[i], b.points[j]);
            let prev = if i == 0 && j == 0 {
                (0.0, 0)
            } else {
                let mut best = (f64::INFINITY, usize::MAX);
                let candidates = [
                    (i > 0 && j > 0).then(|| acc[(i - 1) * m + (j - 1)]),
                    (i > 0).then(|| acc[(i - 1) * m + j]),
                    (j > 0).then(|| acc[i * m + (j - 1)]),
                ];
                for c in candidates.into_iter().flatten() {
                    if c.0 < best.0 || (c.0 == best.0 && c.1 < best.1) {
                        best = c;
                    }
                }
                best
            };
            acc[i * m + j] = (prev.0 + local, prev.1 + 1);
        }
    }
    let (cost, len) = acc[n * m - 1];
    (cost / len as f64).sqrt()
}

/// `m` points at equal arc-length spacing, linearly interpolated in lat/lon.
pub fn resample_by_arclength(t: &Trajectory, m: usize) -> Result<Trajectory, MetricsError> {
    if m < 2 {
        return Err(MetricsError::TooFewSamples(m));
    }
    let pts = &t.points;
    let mut cum = Vec::with_capacity(pts.len());
    cum.push(0.0);
    for w in pts.windows(2) {
        cum.push(cum.last().unwrap() + haversine_m(w[0], w[1]));
    }
    let total = *cum.last().unwrap();
    if total == 0.0 {
        return Trajectory::new(vec![pts[0]; m]);
    }
    let mut out = Vec::with_capacity(m);
    let mut seg = 0;
    for k in 0..m {
        if k == m - 1 {
            out.push(*pts.last().unwrap());
            break;
        }
        let s = total * k as f64 / (m - 1) as f64;
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let span = cum[seg + 1] - cum[seg];
        let f = if span > 0.0 {
            ((s - cum[seg]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (a, b) = (pts[seg], pts[seg + 1]);
        out.push(GeoPoint {
            lat: a.lat + f * (b.lat - a.lat),
            lon: a.lon + f * (b.lon - a.lon),
        });
    }
    Trajectory::new(out)
}

pub fn sequential_rmse(gen: &Trajectory, reference: &Trajectory, m: usize) -> Result<f64, MetricsError> {
    let a = resample_by_arclength(gen, m)?;
    let b = resample_by_arclength(reference, m)?;
    let total: f64 = a.points.iter().zip(&b.points).map(|(&p, &q)| sq_dist(p, q)).sum();
    Ok((total / m as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricConfig {
    pub sequential_samples: usize,
    pub include_pathpoints: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            sequential_samples: DEFAULT_SEQUENTIAL_SAMPLES,
            include_pathpoints: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryErrors {
    pub knn_m: f64,
    pub dtw_m: f64,
    pub seq_m: f64,
}

pub fn compare(
    gen: &Trajectory,
    reference: &Trajectory,
    samples: usize,
) -> Result<TrajectoryErrors, MetricsError> {
    Ok(TrajectoryErrors {
        knn_m: knn_rmse(gen, reference),
        dtw_m: dtw_rmse(gen, reference),
        seq_m: sequential_rmse(gen, reference, samples)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneRow {
    pub scene: String,
    pub knn_m: f64,
    pub dtw_m: f64,
    pub seq_m: f64,
    pub gen_length_km: f64,
    pub ref_length_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        };
        Summary {
            mean: v.iter().sum::<f64>() / n as f64,
            median,
            max: v[n - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub knn_m: Summary,
    pub dtw_m: Summary,
    pub seq_m: Summary,
    pub gen_length_km: Summary,
    pub ref_length_km: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub config: MetricConfig,
    pub per_scene: Vec<SceneRow>,
    pub aggregate: Aggregate,
}

/// Per-scene rows plus mean/median/max of every column.
pub fn report(
    pairs: &[(String, Trajectory, Trajectory)],
    config: MetricConfig,
) -> Result<MetricsReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyReport);
    }
    let per_scene = pairs
        .iter()
        .map(|(name, gen, reference)| {
            let e = compare(gen, reference, config.sequential_samples)?;
            Ok(SceneRow {
                scene: name.clone(),
                knn_m: e.knn_m,
                dtw_m: e.dtw_m,
                seq_m: e.seq_m,
                gen_length_km: gen.length_m() / 1000.0,
                ref_length_km: reference.length_m() / 1000.0,
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    Ok(MetricsReport {
        config,
        aggregate: aggregate(&per_scene),
        per_scene,
    })
}

pub fn aggregate(rows: &[SceneRow]) -> Aggregate {
    let col = |f: fn(&SceneRow) -> f64| Summary::of(&rows.iter().map(f).collect::<Vec<_>>());
    Aggregate {
        knn_m: col(|r| r.knn_m),
        dtw_m: col(|r| r.dtw_m),
        seq_m: col(|r| r.seq_m),
        gen_length_km: col(|r| r.gen_length_km),
        ref_length_km: col(|r| r.ref_length_km),
    }
}
