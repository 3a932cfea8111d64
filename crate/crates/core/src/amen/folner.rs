//! Følner quotients `Vol(gV Δ V) / Vol(V)` of unions of Voronoi cells,
//! estimated by Monte Carlo point classification.

use serde::{Deserialize, Serialize};

use crate::geometry::{Isometry, Point, SpaceKind};
use crate::pointproc::uniform_in_ball;
use crate::rng::rng_from_seed;
use crate::stats::wilson;
use crate::tess::VoronoiCell;

use super::AmenError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientEstimate {
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FolnerReport {
    /// Maximum over the isometry set of the point estimates.
    pub quotient: f64,
    /// Index of the maximising isometry.
    pub argmax: usize,
    pub per_isometry: Vec<QuotientEstimate>,
    /// Exact `Vol(V)` from the cell areas.
    pub volume: f64,
    /// Radius of the sampling ball around the origin.
    pub bounding_radius: f64,
    pub mc_points: usize,
}

struct CellTest {
    nucleus: Point,
    radius: f64,
    straight: Vec<Point>,
}

struct Union {
    space: SpaceKind,
    cells: Vec<CellTest>,
}

impl Union {
    fn contains(&self, x: Point) -> bool {
        let q = match self.space {
            SpaceKind::EuclideanPlane => x,
            SpaceKind::HyperbolicPoincareDisk => crate::geometry::poincare_to_klein(x),
        };
        self.cells.iter().any(|c| {
            self.space.dist_unchecked(x, c.nucleus) <= c.radius && crate::geometry::convex_contains(&c.straight, q)
        })
    }
}

/// Følner quotient of the union `V` of `cells` (each bounded, with known
/// area) under every isometry in `isometries`. `marks` gives the nucleus
/// position of each cell. Points are drawn uniformly from a ball around the
/// origin containing `V` and every `gV`.
pub fn folner_quotient(
    space: SpaceKind,
    cells: &[&VoronoiCell],
    marks: &[Point],
    isometries: &[Isometry],
    mc_points: usize,
    seed: u64,
) -> Result<FolnerReport, AmenError> {
    if cells.is_empty() {
        return Err(AmenError::EmptySet);
    }
    if isometries.is_empty() || mc_points == 0 {
        return Err(AmenError::InvalidParameter("need isometries and sample points".into()));
    }
    if marks.len() != cells.len() {
        return Err(AmenError::Mismatch);
    }
    let mut volume = 0.0;
    let mut tests = Vec::with_capacity(cells.len());
    for (c, &m) in cells.iter().zip(marks) {
        let area = c.area.filter(|_| c.bounded).ok_or(AmenError::UnboundedCell(c.nucleus))?;
        volume += area;
        tests.push(CellTest { nucleus: m, radius: c.radius(m) + 1e-9, straight: c.polygon.straight_chart() });
    }
    if !(volume > 0.0) {
        return Err(AmenError::EmptySet);
    }
    let extent =
        cells.iter().flat_map(|c| c.polygon.vertices.iter()).map(|&p| space.origin_dist(p)).fold(0.0, f64::max);
    let shift = isometries.iter().map(|g| g.origin_distance(Point::ORIGIN)).fold(0.0, f64::max);
    let bounding_radius = extent + shift;
    crate::pointproc::check_window(space, bounding_radius)
        .map_err(|_| AmenError::UndersizedWindow { needed: bounding_radius })?;
    let box_volume = space.ball_volume_unchecked(bounding_radius);
    let union = Union { space, cells: tests };
    let inverses: Vec<Isometry> = isometries.iter().map(Isometry::inverse).collect();
    let mut rng = rng_from_seed(seed);
    let mut hits = vec![0usize; isometries.len()];
    for _ in 0..mc_points {
        let x = uniform_in_ball(space, bounding_radius, &mut rng);
        let in_v = union.contains(x);
        for (h, g_inv) in hits.iter_mut().zip(&inverses) {
            if in_v != union.contains(g_inv.apply(x)) {
                *h += 1;
            }
        }
    }
    let scale = box_volume / volume;
    let per_isometry: Vec<QuotientEstimate> = hits
        .iter()
        .map(|&k| {
            let w = wilson(k, mc_points);
            QuotientEstimate { estimate: w.estimate * scale, ci_lo: w.ci_lo * scale, ci_hi: w.ci_hi * scale }
        })
        .collect();
    let (argmax, quotient) = per_isometry
        .iter()
        .enumerate()
        .map(|(i, q)| (i, q.estimate))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    Ok(FolnerReport { quotient, argmax, per_isometry, volume, bounding_radius, mc_points })
}

/// The four unit translations `(±1, 0)`, `(0, ±1)` as isometries: Euclidean
/// shifts or hyperbolic translations of length 1 along the axes.
pub fn unit_translations(space: SpaceKind) -> Vec<Isometry> {
    (0..4)
        .map(|k| {
            let angle = k as f64 * std::f64::consts::FRAC_PI_2;
            let rot = Isometry::rotation(space, angle);
            rot.compose(&Isometry::axis_translation(space, 1.0)).compose(&rot.inverse())
        })
        .collect()
}
