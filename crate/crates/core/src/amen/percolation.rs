//! δ-Poisson coarsening percolation: an edge of the base network is open iff
//! both endpoints lie in the same Voronoi cell of an independent Poisson
//! process `Q` of intensity δ.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point, SpaceKind, MAX_HYPERBOLIC_WINDOW};
use crate::pointproc::{sample_poisson, PointSample};
use crate::stats::mean_ci;
use crate::tess::{delaunay_points, EmbeddedNetwork, VoronoiCell};

use super::AmenError;

/// Expected number of coarse points in the margin added around the base
/// window; the margin is the radius of a ball holding this many.
const COARSE_MARGIN_POINTS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercolationLabeling {
    pub delta: f64,
    pub seed: u64,
    pub q_points: PointSample,
    /// Index in `q_points` of the nearest coarse point of each base vertex.
    pub labels: Vec<u32>,
    /// `B(v, d(v, q_v))` lies inside the coarse window, so `q_v` is the true
    /// nearest point of the untruncated process.
    pub label_certified: Vec<bool>,
    /// One flag per entry of `net.edges()`.
    pub edge_open: Vec<bool>,
}

impl PercolationLabeling {
    /// Coarsening opens every vertex.
    pub fn vertex_open(&self, _v: u32) -> bool {
        true
    }

    pub fn open_edge_count(&self) -> usize {
        self.edge_open.iter().filter(|&&o| o).count()
    }
}

/// Radius of the coarse window around a base window of radius `base`;
/// hyperbolic windows are clamped at the chart cap.
pub fn coarse_window(space: SpaceKind, base: f64, delta: f64) -> f64 {
    let margin = space.inverse_ball_volume(COARSE_MARGIN_POINTS / delta).unwrap_or(0.0);
    let w = base + margin;
    if space.is_hyperbolic() {
        w.min(MAX_HYPERBOLIC_WINDOW)
    } else {
        w
    }
}

/// Nearest site of `x` by greedy descent on the Delaunay graph of the sites;
/// a local minimum of the distance is the Voronoi cell containing `x`.
fn greedy_nearest(q: &EmbeddedNetwork, x: Point, start: u32) -> (u32, f64) {
    let space = q.space;
    let mut cur = start;
    let mut d = space.dist_unchecked(x, q.mark(cur));
    loop {
        let mut best = (cur, d);
        for &w in q.neighbors(cur) {
            let dw = space.dist_unchecked(x, q.mark(w));
            if dw < best.1 {
                best = (w, dw);
            }
        }
        if best.0 == cur {
            return (cur, d);
        }
        (cur, d) = best;
    }
}

/// Labels each base vertex by its nearest point of a fresh coarse sample of
/// intensity `delta`. Deterministic in `(net, delta, seed)`.
pub fn coarsen_percolation(net: &EmbeddedNetwork, delta: f64, seed: u64) -> Result<PercolationLabeling, AmenError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(AmenError::InvalidParameter(format!("coarse intensity must be positive, got {delta}")));
    }
    let space = net.space;
    let window = coarse_window(space, net.window_radius, delta);
    if window <= net.window_radius {
        return Err(AmenError::CoarseWindow { base: net.window_radius, coarse: window });
    }
    let q_points = sample_poisson(space, delta, window, seed)?;
    let n = net.vertex_count();
    let mut labels = vec![0u32; n];
    let mut label_certified = vec![false; n];
    if q_points.points.is_empty() {
        // no coarse point: one cell covers everything, but it is not the law
        return Ok(PercolationLabeling {
            delta,
            seed,
            q_points,
            labels,
            label_certified,
            edge_open: vec![true; net.edges().len()],
        });
    }
    let qnet = delaunay_points(space, &q_points.points, window)?;
    // breadth-first order so each descent starts at a neighbour's label
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for s in 0..n as u32 {
        if seen[s as usize] {
            continue;
        }
        seen[s as usize] = true;
        queue.push_back((s, 0u32));
        while let Some((v, hint)) = queue.pop_front() {
            let x = net.mark(v);
            let (q, d) = greedy_nearest(&qnet, x, hint);
            labels[v as usize] = q;
            label_certified[v as usize] = net.origin_dist(v) + d <= window;
            for &w in net.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back((w, q));
                }
            }
        }
    }
    let edge_open = net.edges().iter().map(|e| labels[e.a as usize] == labels[e.b as usize]).collect();
    Ok(PercolationLabeling { delta, seed, q_points, labels, label_certified, edge_open })
}

/// Open cluster of the percolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub vertices: Vec<u32>,
    /// Base-network edges with exactly one endpoint in the cluster.
    pub boundary_edge_count: usize,
    /// Sum of the cell areas; present when every cell is certified.
    pub cells_union_area: Option<f64>,
    /// Every vertex is certified and every vertex and neighbour carries a
    /// certified label, so the cluster and its boundary are window-free.
    pub certified: bool,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    /// `|∂_E K| / |K|`.
    pub fn boundary_ratio(&self) -> f64 {
        self.boundary_edge_count as f64 / self.vertices.len() as f64
    }

    /// Cells of the cluster, `None` unless all are certified.
    pub fn cells<'a>(&self, cells: &'a [VoronoiCell]) -> Option<Vec<&'a VoronoiCell>> {
        self.vertices.iter().map(|&v| cells.get(v as usize).filter(|c| c.certified && c.area.is_some())).collect()
    }
}

fn open_adjacency<'a>(
    net: &'a EmbeddedNetwork,
    labeling: &'a PercolationLabeling,
    v: u32,
) -> impl Iterator<Item = u32> + 'a {
    let lv = labeling.labels[v as usize];
    let labels = &labeling.labels;
    net.neighbors(v).iter().copied().filter(move |&w| labels[w as usize] == lv)
}

fn build_cluster(
    net: &EmbeddedNetwork,
    labeling: &PercolationLabeling,
    vertices: Vec<u32>,
    cells: Option<&[VoronoiCell]>,
) -> Cluster {
    let lab = &labeling.labels;
    let mut boundary = 0;
    let mut certified = true;
    for &v in &vertices {
        certified &= net.is_certified(v) && labeling.label_certified[v as usize];
        for &w in net.neighbors(v) {
            if lab[w as usize] != lab[v as usize] {
                boundary += 1;
                certified &= labeling.label_certified[w as usize];
            }
        }
    }
    let cells_union_area = cells.and_then(|cells| {
        vertices.iter().map(|&v| cells.get(v as usize).filter(|c| c.certified).and_then(|c| c.area)).sum()
    });
    Cluster { vertices, boundary_edge_count: boundary, cells_union_area, certified }
}

fn label_check(net: &EmbeddedNetwork, labeling: &PercolationLabeling) -> Result<(), AmenError> {
    if labeling.labels.len() != net.vertex_count() || labeling.edge_open.len() != net.edges().len() {
        return Err(AmenError::Mismatch);
    }
    Ok(())
}

/// Open cluster containing `root`.
pub fn root_cluster(
    net: &EmbeddedNetwork,
    labeling: &PercolationLabeling,
    root: u32,
    cells: Option<&[VoronoiCell]>,
) -> Result<Cluster, AmenError> {
    label_check(net, labeling)?;
    if root as usize >= net.vertex_count() {
        return Err(AmenError::UnknownVertex(root));
    }
    let mut seen = std::collections::HashSet::from([root]);
    let mut stack = vec![root];
    let mut vertices = vec![root];
    while let Some(v) = stack.pop() {
        for w in open_adjacency(net, labeling, v) {
            if seen.insert(w) {
                vertices.push(w);
                stack.push(w);
            }
        }
    }
    vertices.sort_unstable();
    Ok(build_cluster(net, labeling, vertices, cells))
}

/// All open clusters; they partition the vertex set.
pub fn clusters(
    net: &EmbeddedNetwork,
    labeling: &PercolationLabeling,
    cells: Option<&[VoronoiCell]>,
) -> Result<Vec<Cluster>, AmenError> {
    label_check(net, labeling)?;
    let n = net.vertex_count();
    let mut comp = vec![u32::MAX; n];
    let mut groups: Vec<Vec<u32>> = Vec::new();
    for s in 0..n as u32 {
        if comp[s as usize] != u32::MAX {
            continue;
        }
        let id = groups.len() as u32;
        comp[s as usize] = id;
        let mut members = vec![s];
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for w in open_adjacency(net, labeling, v) {
                if comp[w as usize] == u32::MAX {
                    comp[w as usize] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }
    Ok(groups.into_iter().map(|g| build_cluster(net, labeling, g, cells)).collect())
}

/// Closed edges at `v`; its mean over roots equals the mean boundary ratio
/// of the root cluster by mass transport.
pub fn closed_degree(net: &EmbeddedNetwork, labeling: &PercolationLabeling, v: u32) -> usize {
    let lv = labeling.labels[v as usize];
    net.neighbors(v).iter().filter(|&&w| labeling.labels[w as usize] != lv).count()
}

/// Spatial mean of the closed degree over certified vertices within
/// `core_radius` whose own and neighbours' labels are certified. Returns
/// `(sum, count)` so replicas can be pooled.
pub fn closed_degree_sum(net: &EmbeddedNetwork, labeling: &PercolationLabeling, core_radius: f64) -> (f64, usize) {
    net.certified_ids()
        .filter(|&v| net.origin_dist(v) <= core_radius)
        .filter(|&v| {
            labeling.label_certified[v as usize]
                && net.neighbors(v).iter().all(|&w| labeling.label_certified[w as usize])
        })
        .fold((0.0, 0), |(s, c), v| (s + closed_degree(net, labeling, v) as f64, c + 1))
}

/// Boundary ratio of the root cluster over replicas at one coarse intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRatioReport {
    pub delta: f64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub replicas: usize,
    pub discarded: usize,
}

/// Mean of `|∂_E K(o)| / |K(o)|` over replicas; `None` marks a replica
/// whose root cluster was not certified, which is discarded and counted.
pub fn boundary_ratio_estimate(delta: f64, root_ratios: &[Option<f64>]) -> Result<BoundaryRatioReport, AmenError> {
    let kept: Vec<f64> = root_ratios.iter().flatten().copied().collect();
    let est = mean_ci(&kept).ok_or(AmenError::AllDiscarded(root_ratios.len()))?;
    Ok(BoundaryRatioReport {
        delta,
        estimate: est.estimate,
        ci_lo: est.ci_lo,
        ci_hi: est.ci_hi,
        replicas: root_ratios.len(),
        discarded: root_ratios.len() - kept.len(),
    })
}

/// Root-cluster boundary ratio, `None` when the root cluster is uncertified.
pub fn root_boundary_ratio(
    net: &EmbeddedNetwork,
    labeling: &PercolationLabeling,
    root: u32,
) -> Result<Option<f64>, AmenError> {
    let k = root_cluster(net, labeling, root, None)?;
    Ok(k.certified.then(|| k.boundary_ratio()))
}
