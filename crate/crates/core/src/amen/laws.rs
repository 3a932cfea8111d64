//! Distances from the origin to the two closest points of a Poisson process
//! of intensity δ, and the ball-in-cell guarantee they give.

use serde::{Deserialize, Serialize};

use crate::geometry::{Point, SpaceKind};
use crate::pointproc::{check_window, sample_poisson, uniform_in_ball};
use crate::rng::{derive_tagged, rng_from_seed};
use crate::stats::{ks_critical_99, ks_distance};

use super::AmenError;

/// Probability that the second point falls outside the sampling window.
pub const D2_MISS_PROBABILITY: f64 = 1e-4;
/// Sample points drawn per replica for the ball-in-cell check.
pub const BALL_CHECK_POINTS: usize = 100;
/// Points of the tail grids.
pub const TAIL_GRID_POINTS: usize = 20;

/// `Pr[d1 >= t] = exp(-δ f(t))`.
pub fn d1_tail(space: SpaceKind, delta: f64, t: f64) -> f64 {
    (-delta * space.ball_volume_unchecked(t.max(0.0))).exp()
}

/// Upper bound `exp(-δ f(t/2))` on `Pr[d2 - d1 >= t]`.
pub fn gap_envelope(space: SpaceKind, delta: f64, t: f64) -> f64 {
    d1_tail(space, delta, 0.5 * t)
}

/// Exact `Pr[d2 - d1 >= t] = ∫_0^∞ exp(-δ f(r + t)) δ f'(r) dr`: given
/// `d1 = r`, the gap exceeds `t` iff the annulus between `r` and `r + t` is
/// empty. Composite Simpson rule up to the radius where `δ f = 60`.
pub fn gap_tail_exact(space: SpaceKind, delta: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    const N: usize = 20_000;
    let sphere = |r: f64| match space {
        SpaceKind::EuclideanPlane => 2.0 * std::f64::consts::PI * r,
        SpaceKind::HyperbolicPoincareDisk => 2.0 * std::f64::consts::PI * r.sinh(),
    };
    let g = |r: f64| (-delta * space.ball_volume_unchecked(r + t)).exp() * delta * sphere(r);
    let upper = space.inverse_ball_volume(60.0 / delta).unwrap_or(0.0);
    let h = upper / N as f64;
    let mut sum = g(0.0) + g(upper);
    for k in 1..N {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
    }
    sum * h / 3.0
}

/// Smallest window holding the second-closest point with probability at
/// least `1 - D2_MISS_PROBABILITY`: `Pr[d2 > W] = e^{-m}(1 + m)`, `m = δ f(W)`.
pub fn d2_window(space: SpaceKind, delta: f64) -> f64 {
    // solve e^{-m}(1 + m) = p by Newton from m = -ln p
    let p = D2_MISS_PROBABILITY;
    let mut m = -p.ln();
    for _ in 0..50 {
        let val = (-m).exp() * (1.0 + m) - p;
        let der = -(-m).exp() * m;
        let step = val / der;
        m -= step;
        if step.abs() < 1e-14 * m {
            break;
        }
    }
    space.inverse_ball_volume(m / delta).unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    pub empirical: f64,
    /// Closed form (d1) or envelope (gap).
    pub reference: f64,
    /// One binomial standard error at the reference.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D1D2Report {
    pub space: SpaceKind,
    pub delta: f64,
    pub replicas: usize,
    pub window_radius: f64,
    /// Replicas with fewer than two points in the window.
    pub unrealized: usize,
    pub ks_distance: f64,
    pub ks_critical_99: f64,
    pub d1_tail: Vec<TailRow>,
    pub gap_tail: Vec<TailRow>,
    /// Grid points where the empirical gap tail exceeds the envelope by more
    /// than three standard errors.
    pub gap_violations: usize,
    pub ball_checks: usize,
    /// Sampled points of `B(o, (d2 - d1)/2)` whose nearest point is not the
    /// closest point to the origin.
    pub ball_violations: usize,
}

impl D1D2Report {
    pub fn ks_passes(&self) -> bool {
        self.ks_distance < self.ks_critical_99
    }
}

fn tail_fraction(sorted: &[f64], t: f64) -> f64 {
    let below = sorted.partition_point(|&x| x < t);
    (sorted.len() - below) as f64 / sorted.len() as f64
}

/// Nearest-point distances of one replica of the coarse process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D1D2Replica {
    /// `d1`; infinite when the window holds no point.
    pub d1: f64,
    /// `d2 - d1`; infinite when the window holds fewer than two points.
    pub gap: f64,
    pub ball_checks: usize,
    pub ball_violations: usize,
}

impl D1D2Replica {
    pub fn realized(&self) -> bool {
        self.gap.is_finite()
    }
}

fn check_delta(delta: f64) -> Result<(), AmenError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(AmenError::InvalidParameter(format!("intensity must be positive, got {delta}")));
    }
    Ok(())
}

/// Replica `r` of [`d1_d2_statistics`]: a Poisson sample of intensity
/// `delta` in the [`d2_window`] ball, and the ball check around its nearest
/// point.
pub fn d1_d2_replica(space: SpaceKind, delta: f64, seed: u64, r: u64) -> Result<D1D2Replica, AmenError> {
    check_delta(delta)?;
    let window = d2_window(space, delta);
    check_window(space, window).map_err(|_| AmenError::UndersizedWindow { needed: window })?;
    let sample = sample_poisson(space, delta, window, derive_tagged(seed, "coarse", r))?;
    let pts = &sample.points;
    let mut order: Vec<(f64, usize)> = pts.iter().enumerate().map(|(i, &p)| (space.origin_dist(p), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rep = D1D2Replica { d1: f64::INFINITY, gap: f64::INFINITY, ball_checks: 0, ball_violations: 0 };
    match order.as_slice() {
        [] => {}
        [(d1, _)] => rep.d1 = *d1,
        [(d1, q), (d2, _), ..] => {
            rep.d1 = *d1;
            rep.gap = d2 - d1;
            let radius = 0.5 * (d2 - d1);
            let mut rng = rng_from_seed(derive_tagged(seed, "ball", r));
            for _ in 0..BALL_CHECK_POINTS {
                let x = uniform_in_ball(space, radius, &mut rng);
                rep.ball_checks += 1;
                if nearest(space, pts, x) != *q {
                    rep.ball_violations += 1;
                }
            }
        }
    }
    Ok(rep)
}

/// Pools replicas into the tail tables and the KS statistic.
pub fn d1_d2_report(space: SpaceKind, delta: f64, replicas: &[D1D2Replica]) -> Result<D1D2Report, AmenError> {
    check_delta(delta)?;
    if replicas.is_empty() {
        return Err(AmenError::InvalidParameter("need at least one replica".into()));
    }
    let mut d1s: Vec<f64> = replicas.iter().map(|r| r.d1).collect();
    let mut gaps: Vec<f64> = replicas.iter().map(|r| r.gap).collect();
    let n = replicas.len() as f64;
    let ks = ks_distance(&d1s, |t| 1.0 - d1_tail(space, delta, t));
    d1s.sort_by(f64::total_cmp);
    gaps.sort_by(f64::total_cmp);
    let sigma = |p: f64| (p * (1.0 - p) / n).sqrt();
    let t_max = space.inverse_ball_volume(3.0 / delta).unwrap_or(1.0);
    let grid: Vec<f64> = (0..TAIL_GRID_POINTS).map(|k| t_max * k as f64 / (TAIL_GRID_POINTS - 1) as f64).collect();
    let d1_rows: Vec<TailRow> = grid
        .iter()
        .map(|&t| {
            let reference = d1_tail(space, delta, t);
            TailRow { t, empirical: tail_fraction(&d1s, t), reference, sigma: sigma(reference) }
        })
        .collect();
    let gap_rows: Vec<TailRow> = grid
        .iter()
        .map(|&t| {
            let reference = gap_envelope(space, delta, t);
            TailRow { t, empirical: tail_fraction(&gaps, t), reference, sigma: sigma(reference) }
        })
        .collect();
    let gap_violations = gap_rows.iter().filter(|r| r.empirical > r.reference + 3.0 * r.sigma).count();
    Ok(D1D2Report {
        space,
        delta,
        replicas: replicas.len(),
        window_radius: d2_window(space, delta),
        unrealized: replicas.iter().filter(|r| !r.realized()).count(),
        ks_distance: ks,
        ks_critical_99: ks_critical_99(replicas.len()),
        d1_tail: d1_rows,
        gap_tail: gap_rows,
        gap_violations,
        ball_checks: replicas.iter().map(|r| r.ball_checks).sum(),
        ball_violations: replicas.iter().map(|r| r.ball_violations).sum(),
    })
}

/// Empirical laws of `d1` and `d2 - d1` over `replicas` independent Poisson
/// samples in a window sized by [`d2_window`], compared with their closed
/// forms, plus the ball-in-cell check.
pub fn d1_d2_statistics(space: SpaceKind, delta: f64, replicas: usize, seed: u64) -> Result<D1D2Report, AmenError> {
    check_delta(delta)?;
    if replicas == 0 {
        return Err(AmenError::InvalidParameter("need at least one replica".into()));
    }
    let reps = (0..replicas as u64).map(|r| d1_d2_replica(space, delta, seed, r)).collect::<Result<Vec<_>, _>>()?;
    d1_d2_report(space, delta, &reps)
}

fn nearest(space: SpaceKind, pts: &[Point], x: Point) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, &p) in pts.iter().enumerate() {
        let d = space.dist_unchecked(x, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}
