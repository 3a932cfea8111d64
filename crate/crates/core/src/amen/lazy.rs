//! Root cluster of the coarsening percolation on the Palm–Poisson Delaunay
//! graph of the whole space.
//!
//! Sparse coarse processes have cells far larger than any hyperbolic window
//! the chart resolves, so both processes are revealed lazily. Base vertices
//! come from the lazy field of the walk module; coarse points live in their
//! own patches, thinned against earlier ones so their union is a Poisson
//! process. A label is computed in the frame centred at its vertex, so every
//! distance involved stays short.

use std::collections::{HashMap, HashSet, VecDeque};

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::geometry::{Isometry, Point, SpaceKind};
use crate::pointproc::uniform_in_ball;
use crate::rng::{derive_tagged, rng_from_seed, SimRng};
use crate::walk::explore::Field;
use crate::walk::{BallExclusion, RollingParams};

use super::AmenError;

/// Expected coarse points per coarse patch; a patch is missing the nearest
/// point with probability `exp(-COARSE_PATCH_POINTS)`.
const COARSE_PATCH_POINTS: f64 = 30.0;
/// Root clusters larger than this are abandoned and counted as discarded.
pub const MAX_CLUSTER: usize = 200_000;

struct CoarsePatch {
    to_root: Isometry,
    points: Vec<Point>,
}

struct CoarseField {
    space: SpaceKind,
    delta: f64,
    radius: f64,
    patches: Vec<CoarsePatch>,
    rng: SimRng,
}

impl CoarseField {
    fn new(space: SpaceKind, delta: f64, seed: u64) -> Result<Self, AmenError> {
        let radius = space.inverse_ball_volume(COARSE_PATCH_POINTS / delta)?;
        Ok(CoarseField { space, delta, radius, patches: Vec::new(), rng: rng_from_seed(seed) })
    }

    /// Patch-to-frame isometries with their centre distances.
    fn relative(&self, g: &Isometry) -> Vec<(Isometry, f64)> {
        self.patches
            .iter()
            .map(|p| {
                let m = g.compose(&p.to_root);
                let d = m.origin_distance(Point::ORIGIN);
                (m, d)
            })
            .collect()
    }

    fn add_patch(&mut self, g: &Isometry, rel: &[(Isometry, f64)]) {
        let space = self.space;
        let radius = self.radius;
        let mean = self.delta * space.ball_volume_unchecked(radius);
        let count = Poisson::new(mean).map(|d| d.sample(&mut self.rng) as usize).unwrap_or(0);
        let near = BallExclusion::new(
            space,
            radius,
            rel.iter().filter(|&&(_, d)| d < 2.0 * radius).map(|(m, _)| m.apply(Point::ORIGIN)),
        );
        let mut points = Vec::with_capacity(count);
        for _ in 0..count {
            let q = uniform_in_ball(space, radius, &mut self.rng);
            if near.admits(q) {
                points.push(q);
            }
        }
        self.patches.push(CoarsePatch { to_root: g.inverse(), points });
    }

    /// Id of the coarse point nearest to the origin of frame `g`.
    fn nearest(&mut self, g: &Isometry) -> Result<u64, AmenError> {
        for attempt in 0..2 {
            let rel = self.relative(g);
            // depth of the largest origin-centred ball inside one patch ball
            let depth = rel.iter().map(|&(_, d)| self.radius - d).fold(f64::NEG_INFINITY, f64::max);
            if depth > 0.0 {
                let mut best = (u64::MAX, f64::INFINITY);
                for (k, &(m, d)) in rel.iter().enumerate() {
                    if d - self.radius > depth {
                        continue;
                    }
                    for (i, &p) in self.patches[k].points.iter().enumerate() {
                        let dp = m.origin_distance(p);
                        if dp < best.1 {
                            best = ((k as u64) << 32 | i as u64, dp);
                        }
                    }
                }
                if best.1 <= depth {
                    return Ok(best.0);
                }
            }
            if attempt == 0 {
                self.add_patch(g, &rel);
            }
        }
        Err(AmenError::CoarseWindow { base: 0.0, coarse: self.radius })
    }
}

/// Root cluster of one replica of the coarsening on the whole space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LazyRootCluster {
    pub size: usize,
    pub boundary_edge_count: usize,
    /// Largest distance from the root to a cluster vertex.
    pub extent: f64,
    /// Closed edges at the root.
    pub root_closed_degree: usize,
    /// Some vertex could not be certified or the cluster hit [`MAX_CLUSTER`].
    pub discarded: bool,
}

impl LazyRootCluster {
    pub fn boundary_ratio(&self) -> Option<f64> {
        (!self.discarded).then(|| self.boundary_edge_count as f64 / self.size as f64)
    }
}

/// Grows the root cluster of the δ-coarsening of a Palm–Poisson Delaunay
/// graph of intensity `lambda` by breadth-first search over open edges.
pub fn palm_root_cluster(
    space: SpaceKind,
    lambda: f64,
    delta: f64,
    seed: u64,
    params: &RollingParams,
) -> Result<LazyRootCluster, AmenError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(AmenError::InvalidParameter(format!("coarse intensity must be positive, got {delta}")));
    }
    let mut field = Field::palm(space, lambda, params, derive_tagged(seed, "base", 0))
        .map_err(|e| AmenError::InvalidParameter(e.to_string()))?;
    let mut coarse = CoarseField::new(space, delta, derive_tagged(seed, "coarse", 0))?;
    let mut lists: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut labels: HashMap<u64, u64> = HashMap::new();
    let mut label = |field: &Field, coarse: &mut CoarseField, v: u64| -> Result<u64, AmenError> {
        if let Some(&l) = labels.get(&v) {
            return Ok(l);
        }
        let l = coarse.nearest(&field.frame_at(v))?;
        labels.insert(v, l);
        Ok(l)
    };
    let root_label = label(&field, &mut coarse, 0)?;
    let mut members: HashSet<u64> = HashSet::from([0]);
    let mut queue = VecDeque::from([0u64]);
    let mut boundary = 0;
    let mut extent = 0.0f64;
    let mut root_closed_degree = 0;
    let mut discarded = false;
    while let Some(v) = queue.pop_front() {
        let nbrs = match field.neighbours(v, &mut lists).map_err(|e| AmenError::InvalidParameter(e.to_string()))? {
            Some(n) => n.clone(),
            None => {
                discarded = true;
                break;
            }
        };
        extent = extent.max(field.root_distance(v));
        for w in nbrs {
            if label(&field, &mut coarse, w)? == root_label {
                if members.insert(w) {
                    queue.push_back(w);
                }
            } else {
                boundary += 1;
                if v == 0 {
                    root_closed_degree += 1;
                }
            }
        }
        if members.len() > MAX_CLUSTER {
            discarded = true;
            break;
        }
    }
    Ok(LazyRootCluster { size: members.len(), boundary_edge_count: boundary, extent, root_closed_degree, discarded })
}
