//! Graph balls of the Palm–Poisson Delaunay graph of the whole space.
//!
//! Hyperbolic graph balls of a few hops already reach embedded distances
//! beyond any window the chart can resolve, so the balls are grown by
//! breadth-first search over a lazily revealed Poisson process. Each patch
//! keeps its points in its own frame together with the isometry to the root
//! frame. Neighbour lists come from local triangulations of view balls
//! centred at the vertex being expanded; only certified vertices of a local
//! triangulation contribute lists.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use rand_distr::{Distribution, Poisson};

use crate::geometry::{Isometry, Point, SpaceKind};
use crate::pointproc::uniform_in_ball;
use crate::rng::{rng_from_seed, SimRng};
use crate::tess::delaunay_points;

use super::{BallExclusion, BallRecord, RollingParams, WalkError};

struct Patch {
    to_root: Isometry,
    points: Vec<Point>,
}

/// Lazily revealed Palm–Poisson process. Vertex ids pack the patch index in
/// the high and the point index in the low 32 bits; the Palm atom is id 0.
pub(crate) struct Field {
    space: SpaceKind,
    lambda: f64,
    params: RollingParams,
    patches: Vec<Patch>,
    rng: SimRng,
}

fn split(id: u64) -> (usize, usize) {
    ((id >> 32) as usize, (id & 0xFFFF_FFFF) as usize)
}

impl Field {
    pub(crate) fn palm(space: SpaceKind, lambda: f64, params: &RollingParams, seed: u64) -> Result<Field, WalkError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(WalkError::InvalidParameter(format!("intensity must be positive, got {lambda}")));
        }
        let mut field = Field { space, lambda, params: *params, patches: Vec::new(), rng: rng_from_seed(seed) };
        field.cover(&Isometry::identity(space), &mut Vec::new());
        field.patches[0].points.insert(0, Point::ORIGIN);
        Ok(field)
    }

    /// Neighbour list of `id`, revealing more of the process if needed;
    /// `None` when `id` is not certified at the centre of its own view.
    pub(crate) fn neighbours<'a>(
        &mut self,
        id: u64,
        lists: &'a mut HashMap<u64, Vec<u64>>,
    ) -> Result<Option<&'a Vec<u64>>, WalkError> {
        if !lists.contains_key(&id) {
            self.explore(id, lists)?;
        }
        Ok(lists.get(&id))
    }

    /// Isometry from the root frame to the frame centred at vertex `id`.
    pub(crate) fn frame_at(&self, id: u64) -> Isometry {
        let (k, i) = split(id);
        let patch = &self.patches[k];
        Isometry::to_origin(self.space, patch.points[i]).compose(&patch.to_root.inverse())
    }

    pub(crate) fn root_distance(&self, id: u64) -> f64 {
        let (k, i) = split(id);
        self.patches[k].to_root.origin_distance(self.patches[k].points[i])
    }

    /// Patch-to-frame isometries and centre distances for the frame `g`.
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

    /// Reveals a patch centred at the origin of frame `g` unless the view
    /// ball there is already covered.
    fn cover(&mut self, g: &Isometry, rel: &mut Vec<(Isometry, f64)>) {
        let radius = self.params.patch_radius;
        if rel.iter().any(|&(_, d)| d <= radius - self.params.view_radius) {
            return;
        }
        let space = self.space;
        let mean = self.lambda * space.ball_volume_unchecked(radius);
        let count = Poisson::new(mean).map(|d| d.sample(&mut self.rng) as usize).unwrap_or(0);
        // most recent patches first: they are the likeliest to overlap
        let near = BallExclusion::new(
            space,
            radius,
            rel.iter().rev().filter(|&&(_, d)| d < 2.0 * radius).map(|(m, _)| m.apply(Point::ORIGIN)),
        );
        let mut points = Vec::with_capacity(count);
        for _ in 0..count {
            let q = uniform_in_ball(space, radius, &mut self.rng);
            if near.admits(q) {
                points.push(q);
            }
        }
        self.patches.push(Patch { to_root: g.inverse(), points });
        rel.push((Isometry::identity(space), 0.0));
    }

    /// Expands the view ball at vertex `id`, recording the neighbour lists
    /// of its certified vertices.
    fn explore(&mut self, id: u64, lists: &mut HashMap<u64, Vec<u64>>) -> Result<(), WalkError> {
        let g = self.frame_at(id);
        let mut rel = self.relative(&g);
        self.cover(&g, &mut rel);
        let view = self.params.view_radius;
        let reach = self.params.patch_radius + view;
        let mut pts = Vec::new();
        let mut ids = Vec::new();
        for (k, (m, d)) in rel.iter().enumerate() {
            if *d >= reach {
                continue;
            }
            // the view ball seen from the patch frame
            let ball = BallExclusion::new(self.space, view, [m.inverse().apply(Point::ORIGIN)]);
            for (i, &p) in self.patches[k].points.iter().enumerate() {
                if !ball.admits(p) {
                    pts.push(m.apply(p));
                    ids.push((k as u64) << 32 | i as u64);
                }
            }
        }
        let net = delaunay_points(self.space, &pts, view)?;
        for v in net.certified_ids() {
            lists.entry(ids[v as usize]).or_insert_with(|| net.neighbors(v).iter().map(|&w| ids[w as usize]).collect());
        }
        Ok(())
    }
}

/// Graph balls `B_G(o, R)` around the Palm atom of a Poisson process of
/// intensity `lambda` on the whole space, for each `R` in `r_grid`, tested
/// against embedded balls `B(o, t R)` for each `t` in `t_grid`. A ball is
/// invalid only if some vertex at hop distance below `R` failed to be
/// certified at the centre of its own view ball.
pub fn palm_graph_balls(
    space: SpaceKind,
    lambda: f64,
    r_grid: &[u32],
    t_grid: &[f64],
    seed: u64,
    params: &RollingParams,
) -> Result<Vec<BallRecord>, WalkError> {
    if t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(WalkError::InvalidParameter("t grid must be positive".into()));
    }
    let mut field = Field::palm(space, lambda, params, seed)?;
    let max_r = r_grid.iter().copied().max().unwrap_or(0);
    let mut lists: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut hops: HashMap<u64, u32> = HashMap::from([(0, 0)]);
    let mut order: Vec<(u64, u32)> = vec![(0, 0)];
    let mut failed_at = u32::MAX;
    let mut queue = VecDeque::from([0u64]);
    while let Some(v) = queue.pop_front() {
        let h = hops[&v];
        if h >= max_r || h >= failed_at {
            continue;
        }
        let Some(nbrs) = field.neighbours(v, &mut lists)? else {
            failed_at = failed_at.min(h);
            continue;
        };
        for &w in nbrs {
            if let Entry::Vacant(e) = hops.entry(w) {
                e.insert(h + 1);
                order.push((w, h + 1));
                queue.push_back(w);
            }
        }
    }
    let dists: Vec<(u32, f64)> = order.iter().map(|&(v, h)| (h, field.root_distance(v))).collect();
    Ok(r_grid
        .iter()
        .map(|&r| {
            let inside = dists.iter().filter(|&&(h, _)| h <= r);
            let (size, extent) = inside.fold((0usize, 0.0f64), |(n, e), &(_, d)| (n + 1, e.max(d)));
            BallRecord {
                radius: r,
                valid: r <= failed_at,
                size,
                extent,
                noncontained: t_grid.iter().map(|&t| extent > t * r as f64).collect(),
            }
        })
        .collect())
}
