//! Tail of the root cell's radius under the Palm–Poisson law.
//!
//! The root cell is grown from the points nearest to the origin: once all
//! points within distance `rho` are known and the cell they cut out has radius
//! at most `rho / 2`, no farther point can touch it, so the cell is exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{Point, SpaceKind, MAX_HYPERBOLIC_WINDOW};
use crate::pointproc::{check_window, RadialPoisson};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::wilson;

use super::{delaunay_points, voronoi_cell, TessError};

/// Window slack beyond twice the largest tested radius.
pub const TAIL_WINDOW_MARGIN: f64 = 1.0;

const INITIAL_POINTS: usize = 24;

/// Radius of the Palm root cell, `max` distance from the origin to its
/// vertices. Returns infinity when the cell is unbounded inside the window;
/// a value above `window / 2` is only a lower bound.
pub fn root_cell_radius(space: SpaceKind, lambda: f64, window_radius: f64, seed: u64) -> Result<f64, TessError> {
    check_window(space, window_radius)?;
    let mut gen = RadialPoisson::new(space, lambda, rng_from_seed(seed))?;
    let mut pts = vec![Point::ORIGIN];
    let mut pending: Option<(f64, Point)> = None;
    let mut exhausted = false;
    let mut target = INITIAL_POINTS;
    loop {
        while !exhausted && pts.len() < target {
            let (d, p) = match pending.take() {
                Some(x) => x,
                None => gen.next().expect("radial generator is unbounded"),
            };
            if d > window_radius {
                exhausted = true;
            } else {
                pts.push(p);
            }
        }
        let rho = if exhausted {
            window_radius
        } else {
            let next = gen.next().expect("radial generator is unbounded");
            let d = next.0.min(window_radius);
            pending = Some(next);
            d
        };
        let radius = if pts.len() >= 3 {
            let net = delaunay_points(space, &pts, window_radius)?;
            voronoi_cell(&net, 0).radius(Point::ORIGIN)
        } else {
            f64::INFINITY
        };
        if radius <= 0.5 * rho || exhausted {
            return Ok(radius);
        }
        target *= 2;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub radius: f64,
    /// Empirical `P[root cell not inside B(o, radius)]`.
    pub probability: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub exceedances: usize,
    /// `C f(R) exp(-lambda f(R - 1))`.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTable {
    pub space: SpaceKind,
    pub lambda: f64,
    pub replicas: usize,
    /// Envelope constant fixed at the smallest radius of the grid.
    pub constant: f64,
    /// The calibration radius had no exceedances; `constant` uses 3/N.
    pub rule_of_three: bool,
    pub rows: Vec<TailRow>,
}

fn envelope_shape(space: SpaceKind, lambda: f64, r: f64) -> f64 {
    space.ball_volume_unchecked(r) * (-lambda * space.ball_volume_unchecked((r - 1.0).max(0.0))).exp()
}

/// Empirical tail of the root cell radius over `replicas` Palm samples,
/// with the envelope calibrated at the smallest grid radius.
pub fn cell_diameter_tail(
    space: SpaceKind,
    lambda: f64,
    r_grid: &[f64],
    replicas: usize,
    seed: u64,
    window_radius: f64,
) -> Result<TailTable, TessError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(TessError::InvalidParameter(format!("intensity must be positive, got {lambda}")));
    }
    if r_grid.is_empty() || r_grid.iter().any(|r| !(*r > 0.0)) {
        return Err(TessError::InvalidParameter("radius grid must be nonempty and positive".into()));
    }
    if replicas == 0 {
        return Err(TessError::InvalidParameter("replicas must be positive".into()));
    }
    let mut grid = r_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let needed = 2.0 * grid[grid.len() - 1] + TAIL_WINDOW_MARGIN;
    let cap = if space.is_hyperbolic() { MAX_HYPERBOLIC_WINDOW } else { f64::INFINITY };
    if window_radius < needed || window_radius > cap {
        return Err(TessError::InsufficientWindow { window: window_radius, needed });
    }
    let radii: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| root_cell_radius(space, lambda, window_radius, derive_seed(seed, r)))
        .collect::<Result<_, _>>()?;
    Ok(tail_table(space, lambda, &grid, &radii))
}

/// Tail table of the given root cell radii over the sorted, nonempty
/// `grid`; replica `r` of [`cell_diameter_tail`] is
/// `root_cell_radius(space, lambda, window, derive_seed(seed, r))`.
pub fn tail_table(space: SpaceKind, lambda: f64, grid: &[f64], radii: &[f64]) -> TailTable {
    let replicas = radii.len();
    let counts: Vec<usize> = grid.iter().map(|&r| radii.iter().filter(|&&x| x > r).count()).collect();
    let n = replicas as f64;
    let rule_of_three = counts[0] == 0;
    let p0 = if rule_of_three { 3.0 / n } else { counts[0] as f64 / n };
    let constant = p0 / envelope_shape(space, lambda, grid[0]);
    let rows = grid
        .iter()
        .zip(&counts)
        .map(|(&r, &k)| {
            let w = wilson(k, replicas);
            TailRow {
                radius: r,
                probability: w.estimate,
                ci_lo: w.ci_lo,
                ci_hi: w.ci_hi,
                exceedances: k,
                envelope: constant * envelope_shape(space, lambda, r),
            }
        })
        .collect();
    TailTable { space, lambda, replicas, constant, rule_of_three, rows }
}
