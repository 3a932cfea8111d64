//! Simple random walk on embedded Delaunay networks.
//!
//! Walks on a finite network are censored at the first uncertified vertex:
//! beyond it the neighbour lists depend on the window. Long walks on the
//! infinite Poisson–Delaunay graph use [`rolling`], which reveals the point
//! process patch by patch around the walker.

pub mod explore;
pub mod rolling;

use std::collections::VecDeque;
use std::fmt::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Point, SpaceKind};
use crate::rng::rng_from_seed;
use crate::stats::{linear_fit, mean_ci, wilson, LinearFit};
use crate::tess::{EmbeddedNetwork, TessError};

pub use explore::palm_graph_balls;
pub use rolling::{srw_rolling, RollingParams};

/// Minimum number of uncensored traces accepted by the speed estimators.
pub const MIN_UNCENSORED: usize = 30;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("vertex {0} does not exist")]
    UnknownVertex(u32),
    #[error("start vertex {0} is not certified")]
    UncertifiedStart(u32),
    #[error("start vertex {0} is isolated")]
    IsolatedStart(u32),
    #[error("all {0} traces are censored; enlarge the window")]
    AllCensored(usize),
    #[error("need at least {need} uncensored traces, have {have}")]
    TooFewTraces { have: usize, need: usize },
    #[error("uncensored traces have unequal lengths")]
    UnequalLengths,
    #[error("graph displacements are not available for these traces")]
    NoGraphDistances,
    #[error("no replica had a graph ball of radius {0} inside the certified core")]
    CoreTooSmall(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Tess(#[from] TessError),
}

/// Positions of one walk. Entry `j` describes `X_j`; censored traces stop
/// at the last certified vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkTrace {
    pub vertex_ids: Vec<u64>,
    /// `d(X_j, X_0)` in the embedding space.
    pub embedded_displacements: Vec<f64>,
    /// `d_G(X_j, X_0)` in hops; absent for walks on a rolling environment.
    pub graph_displacements: Option<Vec<u32>>,
    pub censored: bool,
    pub seed: u64,
}

impl WalkTrace {
    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.vertex_ids.len().saturating_sub(1)
    }

    /// CSV with header `step,vertex_id,d_embedded,d_graph`; `d_graph` is
    /// empty when unavailable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,vertex_id,d_embedded,d_graph\n");
        for (j, (&v, &d)) in self.vertex_ids.iter().zip(&self.embedded_displacements).enumerate() {
            let _ = write!(out, "{j},{v},{d},");
            if let Some(g) = &self.graph_displacements {
                let _ = write!(out, "{}", g[j]);
            }
            out.push('\n');
        }
        out
    }
}

/// Tests whether points avoid a family of open balls of one common radius,
/// comparing squared chart distances instead of evaluating distances.
pub(crate) struct BallExclusion {
    space: SpaceKind,
    threshold: f64,
    centers: Vec<(Point, f64)>,
}

impl BallExclusion {
    pub(crate) fn new(space: SpaceKind, radius: f64, centers: impl IntoIterator<Item = Point>) -> Self {
        let threshold = match space {
            SpaceKind::EuclideanPlane => radius * radius,
            // d(p, q) >= R iff |p - q|^2 >= sinh^2(R/2) (1 - |p|^2)(1 - |q|^2)
            SpaceKind::HyperbolicPoincareDisk => (0.5 * radius).sinh().powi(2),
        };
        let centers = centers
            .into_iter()
            .map(|c| {
                let w = match space {
                    SpaceKind::EuclideanPlane => 1.0,
                    SpaceKind::HyperbolicPoincareDisk => threshold * (1.0 - c.norm_sq()),
                };
                (c, w)
            })
            .collect();
        BallExclusion { space, threshold, centers }
    }

    /// `q` lies in none of the balls.
    pub(crate) fn admits(&self, q: Point) -> bool {
        match self.space {
            SpaceKind::EuclideanPlane => self.centers.iter().all(|&(c, _)| q.sub(c).norm_sq() >= self.threshold),
            SpaceKind::HyperbolicPoincareDisk => {
                let wq = 1.0 - q.norm_sq();
                self.centers.iter().all(|&(c, w)| q.sub(c).norm_sq() >= w * wq)
            }
        }
    }
}

/// Hop distances from `source`; `u32::MAX` marks unreachable vertices.
pub fn bfs_distances(net: &EmbeddedNetwork, source: u32) -> Vec<u32> {
    let mut dist = vec![u32::MAX; net.vertex_count()];
    dist[source as usize] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let next = dist[v as usize] + 1;
        for &w in net.neighbors(v) {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = next;
                queue.push_back(w);
            }
        }
    }
    dist
}

fn check_start(net: &EmbeddedNetwork, v: u32) -> Result<(), WalkError> {
    if v as usize >= net.vertex_count() {
        return Err(WalkError::UnknownVertex(v));
    }
    if net.degree(v) == 0 {
        return Err(WalkError::IsolatedStart(v));
    }
    if !net.is_certified(v) {
        return Err(WalkError::UncertifiedStart(v));
    }
    Ok(())
}

/// Simple random walk of `steps` steps from `start`, censored at the first
/// uncertified vertex.
pub fn srw(net: &EmbeddedNetwork, start: u32, steps: usize, seed: u64) -> Result<WalkTrace, WalkError> {
    check_start(net, start)?;
    let mut rng = rng_from_seed(seed);
    let hops = bfs_distances(net, start);
    let origin = net.mark(start);
    let mut trace = WalkTrace {
        vertex_ids: vec![start as u64],
        embedded_displacements: vec![0.0],
        graph_displacements: Some(vec![0]),
        censored: false,
        seed,
    };
    let mut v = start;
    for _ in 0..steps {
        let nbrs = net.neighbors(v);
        let next = nbrs[rng.random_range(0..nbrs.len())];
        if !net.is_certified(next) {
            trace.censored = true;
            break;
        }
        v = next;
        trace.vertex_ids.push(v as u64);
        trace.embedded_displacements.push(net.space.dist_unchecked(origin, net.mark(v)));
        if let Some(g) = trace.graph_displacements.as_mut() {
            g.push(hops[v as usize]);
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedMode {
    Embedded,
    Graph,
}

/// Estimator report, serialized as
/// `{mode, n, estimate, ci_lo, ci_hi, censored_fraction, replicas}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedReport {
    pub mode: SpeedMode,
    pub n: usize,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub censored_fraction: f64,
    /// Uncensored traces used.
    pub replicas: usize,
}

fn displacement(trace: &WalkTrace, mode: SpeedMode, j: usize) -> Result<f64, WalkError> {
    match mode {
        SpeedMode::Embedded => Ok(trace.embedded_displacements[j]),
        SpeedMode::Graph => {
            let g = trace.graph_displacements.as_ref().ok_or(WalkError::NoGraphDistances)?;
            Ok(g[j] as f64)
        }
    }
}

fn uncensored(traces: &[WalkTrace]) -> Result<Vec<&WalkTrace>, WalkError> {
    let ok: Vec<&WalkTrace> = traces.iter().filter(|t| !t.censored).collect();
    if ok.is_empty() {
        return Err(WalkError::AllCensored(traces.len()));
    }
    if ok.len() < MIN_UNCENSORED {
        return Err(WalkError::TooFewTraces { have: ok.len(), need: MIN_UNCENSORED });
    }
    Ok(ok)
}

/// Mean of `displacement(n) / n` over uncensored traces, `n` being their
/// common length, with a normal-approximation interval over replicas.
pub fn speed_estimate(traces: &[WalkTrace], mode: SpeedMode) -> Result<SpeedReport, WalkError> {
    let ok = uncensored(traces)?;
    let n = ok[0].steps();
    if ok.iter().any(|t| t.steps() != n) {
        return Err(WalkError::UnequalLengths);
    }
    speed_estimate_at(traces, mode, n)
}

/// As [`speed_estimate`], at step `n` of traces at least that long.
pub fn speed_estimate_at(traces: &[WalkTrace], mode: SpeedMode, n: usize) -> Result<SpeedReport, WalkError> {
    if n == 0 {
        return Err(WalkError::InvalidParameter("speed needs n >= 1".into()));
    }
    let ok = uncensored(traces)?;
    if ok.iter().any(|t| t.steps() < n) {
        return Err(WalkError::UnequalLengths);
    }
    let values = ok.iter().map(|t| displacement(t, mode, n).map(|d| d / n as f64)).collect::<Result<Vec<_>, _>>()?;
    let est = mean_ci(&values).expect("nonempty");
    Ok(SpeedReport {
        mode,
        n,
        estimate: est.estimate,
        ci_lo: est.ci_lo,
        ci_hi: est.ci_hi,
        censored_fraction: (traces.len() - ok.len()) as f64 / traces.len() as f64,
        replicas: ok.len(),
    })
}

/// Least-squares slope of `log E d(X_n)` against `log n` over `checkpoints`.
pub fn displacement_scaling(
    traces: &[WalkTrace],
    mode: SpeedMode,
    checkpoints: &[usize],
) -> Result<LinearFit, WalkError> {
    if checkpoints.len() < 2 {
        return Err(WalkError::InvalidParameter("scaling needs at least two checkpoints".into()));
    }
    let mut xs = Vec::with_capacity(checkpoints.len());
    let mut ys = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        let r = speed_estimate_at(traces, mode, n)?;
        xs.push((n as f64).ln());
        ys.push((r.estimate * n as f64).ln());
    }
    linear_fit(&xs, &ys).ok_or_else(|| WalkError::InvalidParameter("degenerate checkpoints".into()))
}

/// `deg(root) / mean certified degree`.
pub fn degree_bias_weight(net: &EmbeddedNetwork, root: u32) -> Result<f64, WalkError> {
    check_start(net, root)?;
    let (count, sum) = net.certified_ids().fold((0usize, 0usize), |(c, s), v| (c + 1, s + net.degree(v)));
    Ok(net.degree(root) as f64 * count as f64 / sum as f64)
}

/// Graph ball `B_G(root, R)` of one replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRecord {
    pub radius: u32,
    /// Every vertex at hop distance below `radius` is certified, so the ball
    /// is the same as in the infinite network.
    pub valid: bool,
    pub size: usize,
    /// Largest embedded distance from the root within the ball.
    pub extent: f64,
    /// Per `t`: the ball is not inside `B(root, t R)`.
    pub noncontained: Vec<bool>,
}

/// Graph balls around `root` for each radius in `r_grid`, tested against
/// embedded balls of radius `t R` for each `t` in `t_grid`.
pub fn graph_balls(
    net: &EmbeddedNetwork,
    root: u32,
    r_grid: &[u32],
    t_grid: &[f64],
) -> Result<Vec<BallRecord>, WalkError> {
    check_start(net, root)?;
    if t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(WalkError::InvalidParameter("t grid must be positive".into()));
    }
    let hops = bfs_distances(net, root);
    let origin = net.mark(root);
    Ok(r_grid
        .iter()
        .map(|&r| {
            let mut size = 0;
            let mut extent: f64 = 0.0;
            let mut valid = true;
            for (v, &h) in hops.iter().enumerate() {
                if h > r {
                    continue;
                }
                size += 1;
                extent = extent.max(net.space.dist_unchecked(origin, net.mark(v as u32)));
                valid &= h == r || net.is_certified(v as u32);
            }
            let noncontained = t_grid.iter().map(|&t| extent > t * r as f64).collect();
            BallRecord { radius: r, valid, size, extent, noncontained }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentRow {
    pub radius: u32,
    pub replicas: usize,
    pub discarded: usize,
    /// Mean of `|B_G(o, R)|^{1/R}` over valid replicas (`NaN` at `R = 0`).
    pub growth: f64,
    pub growth_ci_lo: f64,
    pub growth_ci_hi: f64,
    /// Per `t`: empirical `P[B_G(o, R) not inside B(o, t R)]`.
    pub noncontainment: Vec<f64>,
    pub noncontainment_ci_hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentTable {
    pub t_grid: Vec<f64>,
    pub rows: Vec<ContainmentRow>,
}

/// Aggregates per-replica [`graph_balls`] output; invalid balls are
/// discarded and counted.
pub fn graph_ball_containment(replicas: &[Vec<BallRecord>], t_grid: &[f64]) -> Result<ContainmentTable, WalkError> {
    let Some(first) = replicas.first() else {
        return Err(WalkError::InvalidParameter("no replicas".into()));
    };
    let mut rows = Vec::with_capacity(first.len());
    for (k, rec) in first.iter().enumerate() {
        let valid: Vec<&BallRecord> = replicas.iter().map(|r| &r[k]).filter(|b| b.valid).collect();
        if valid.is_empty() {
            return Err(WalkError::CoreTooSmall(rec.radius));
        }
        let growth: Vec<f64> = valid.iter().map(|b| (b.size as f64).powf(1.0 / b.radius as f64)).collect();
        let g = mean_ci(&growth).expect("nonempty");
        let per_t: Vec<_> = (0..t_grid.len())
            .map(|i| wilson(valid.iter().filter(|b| b.noncontained[i]).count(), valid.len()))
            .collect();
        rows.push(ContainmentRow {
            radius: rec.radius,
            replicas: valid.len(),
            discarded: replicas.len() - valid.len(),
            growth: g.estimate,
            growth_ci_lo: g.ci_lo,
            growth_ci_hi: g.ci_hi,
            noncontainment: per_t.iter().map(|w| w.estimate).collect(),
            noncontainment_ci_hi: per_t.iter().map(|w| w.ci_hi).collect(),
        });
    }
    Ok(ContainmentTable { t_grid: t_grid.to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(n: usize, edges: &[(u32, u32)]) -> EmbeddedNetwork {
        let marks = (0..n).map(|i| Point::new(i as f64, 0.0)).collect();
        EmbeddedNetwork::from_edges(SpaceKind::EuclideanPlane, 100.0, marks, edges, vec![true; n]).unwrap()
    }

    #[test]
    fn ball_exclusion_agrees_with_distances() {
        let mut rng = rng_from_seed(2);
        for space in [SpaceKind::EuclideanPlane, SpaceKind::HyperbolicPoincareDisk] {
            let centers: Vec<Point> = (0..5).map(|_| crate::pointproc::uniform_in_ball(space, 6.0, &mut rng)).collect();
            let test = BallExclusion::new(space, 3.0, centers.clone());
            for _ in 0..2000 {
                let q = crate::pointproc::uniform_in_ball(space, 7.0, &mut rng);
                let direct = centers.iter().all(|&c| space.dist_unchecked(q, c) >= 3.0);
                assert_eq!(test.admits(q), direct);
            }
        }
    }

    #[test]
    fn zero_steps_is_a_single_position() {
        let net = synthetic(3, &[(0, 1), (1, 2), (0, 2)]);
        let t = srw(&net, 0, 0, 1).unwrap();
        assert_eq!(t.vertex_ids, vec![0]);
        assert_eq!(t.embedded_displacements, vec![0.0]);
    }

    #[test]
    fn two_vertex_path_alternates() {
        let net = synthetic(2, &[(0, 1)]);
        let t = srw(&net, 0, 9, 4).unwrap();
        for (j, &v) in t.vertex_ids.iter().enumerate() {
            assert_eq!(v, (j % 2) as u64);
        }
        assert_eq!(t.graph_displacements.unwrap()[3], 1);
    }

    #[test]
    fn isolated_start_is_rejected() {
        let net = synthetic(3, &[(1, 2)]);
        assert_eq!(srw(&net, 0, 5, 1).unwrap_err(), WalkError::IsolatedStart(0));
    }

    #[test]
    fn censoring_stops_before_uncertified_vertex() {
        let marks = (0..3).map(|i| Point::new(i as f64, 0.0)).collect();
        let net = EmbeddedNetwork::from_edges(
            SpaceKind::EuclideanPlane,
            10.0,
            marks,
            &[(0, 1), (1, 2)],
            vec![true, true, false],
        )
        .unwrap();
        let t = (0..50).map(|s| srw(&net, 0, 20, s).unwrap()).find(|t| t.censored).unwrap();
        assert!(t.vertex_ids.iter().all(|&v| v != 2));
        assert_eq!(t.vertex_ids.len(), t.embedded_displacements.len());
    }

    #[test]
    fn zero_displacements_give_zero_width() {
        let traces: Vec<WalkTrace> = (0..30)
            .map(|s| WalkTrace {
                vertex_ids: vec![0; 5],
                embedded_displacements: vec![0.0; 5],
                graph_displacements: Some(vec![0; 5]),
                censored: false,
                seed: s,
            })
            .collect();
        let r = speed_estimate(&traces, SpeedMode::Graph).unwrap();
        assert_eq!((r.estimate, r.ci_lo, r.ci_hi), (0.0, 0.0, 0.0));
        assert_eq!(r.n, 4);
    }

    #[test]
    fn speed_needs_enough_uncensored_traces() {
        let net = synthetic(2, &[(0, 1)]);
        let traces: Vec<WalkTrace> = (0..10).map(|s| srw(&net, 0, 4, s).unwrap()).collect();
        assert!(matches!(speed_estimate(&traces, SpeedMode::Embedded), Err(WalkError::TooFewTraces { .. })));
        let mut censored = traces.clone();
        censored.iter_mut().for_each(|t| t.censored = true);
        assert!(matches!(speed_estimate(&censored, SpeedMode::Embedded), Err(WalkError::AllCensored(10))));
    }

    #[test]
    fn degree_weights() {
        let cycle: Vec<(u32, u32)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let net = synthetic(6, &cycle);
        assert!((0..6).all(|v| degree_bias_weight(&net, v).unwrap() == 1.0));
        // star: hub degree 12, leaves degree 1, mean 24/13
        let star: Vec<(u32, u32)> = (1..13).map(|i| (0, i)).collect();
        let net = synthetic(13, &star);
        assert!((degree_bias_weight(&net, 0).unwrap() - 12.0 * 13.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn radius_zero_ball_is_contained() {
        let net = synthetic(3, &[(0, 1), (1, 2)]);
        let balls = graph_balls(&net, 1, &[0, 1], &[0.5, 2.0]).unwrap();
        assert_eq!(balls[0].size, 1);
        assert_eq!(balls[0].noncontained, vec![false, false]);
        assert_eq!(balls[1].size, 3);
        assert_eq!(balls[1].noncontained, vec![true, false]);
    }

    #[test]
    fn trace_csv_has_one_row_per_position() {
        let net = synthetic(2, &[(0, 1)]);
        let csv = srw(&net, 0, 3, 1).unwrap().to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(csv.lines().nth(2).unwrap(), "1,1,1,1");
    }
}
