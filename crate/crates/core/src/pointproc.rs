//! Point process samplers: stationary Poisson, its Palm version, and the
//! zero set of a Kac polynomial as a stand-in for the hyperbolic GAF.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{self, BufRead};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geometry::{GeometryError, Point, SpaceKind, CHART_GUARD, COINCIDENCE_TOL, MAX_HYPERBOLIC_WINDOW};
use crate::poly::{ComplexPolynomial, PolyError};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("intensity must be positive and finite, got {0}")]
    InvalidIntensity(f64),
    #[error("window radius must be nonnegative and finite, got {0}")]
    InvalidWindow(f64),
    #[error("hyperbolic window radius {radius} exceeds the precision cap {MAX_HYPERBOLIC_WINDOW}")]
    WindowTooLarge { radius: f64 },
    #[error("polynomial degree must be at least {min}, got {degree}")]
    InvalidDegree { degree: u32, min: u32 },
    #[error("sample is already a Palm sample")]
    AlreadyPalm,
    #[error("only Poisson samples can be palmified")]
    NotPoisson,
    #[error("Kac process lives on the hyperbolic disk")]
    KacNeedsHyperbolic,
    #[error(transparent)]
    Roots(#[from] PolyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("malformed point file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessKind {
    Poisson { lambda: f64 },
    PalmPoisson { lambda: f64 },
    KacGaf { degree: u32 },
}

impl ProcessKind {
    pub fn intensity(&self) -> Option<f64> {
        match *self {
            ProcessKind::Poisson { lambda } | ProcessKind::PalmPoisson { lambda } => Some(lambda),
            ProcessKind::KacGaf { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProcessKind::Poisson { .. } => "poisson",
            ProcessKind::PalmPoisson { .. } => "palm_poisson",
            ProcessKind::KacGaf { .. } => "kac_gaf",
        }
    }
}

/// A finite realization of a point process in `B(o, window_radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub space: SpaceKind,
    pub points: Vec<Point>,
    pub window_radius: f64,
    pub kind: ProcessKind,
    pub seed: u64,
}

/// JSON sidecar written next to the `x,y` CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub space: SpaceKind,
    pub kind: String,
    pub lambda: Option<f64>,
    pub degree: Option<u32>,
    pub window_radius: f64,
    pub seed: u64,
    pub count: usize,
}

impl PointSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sidecar(&self) -> SampleSidecar {
        SampleSidecar {
            space: self.space,
            kind: self.kind.name().to_string(),
            lambda: self.kind.intensity(),
            degree: match self.kind {
                ProcessKind::KacGaf { degree } => Some(degree),
                _ => None,
            },
            window_radius: self.window_radius,
            seed: self.seed,
            count: self.points.len(),
        }
    }

    /// RFC 4180 CSV with an `x,y` header and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(40 * self.points.len() + 4);
        out.push_str("x,y\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.x, p.y);
        }
        out
    }

    pub fn points_from_csv<R: BufRead>(reader: R) -> Result<Vec<Point>, SampleError> {
        let mut lines = reader.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "x,y" => {}
            _ => return Err(SampleError::Parse("missing x,y header".into())),
        }
        let mut pts = Vec::new();
        for line in lines {
            let line = line.map_err(|e: io::Error| SampleError::Parse(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let (x, y) = line.split_once(',').ok_or_else(|| SampleError::Parse(format!("bad row {line:?}")))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| SampleError::Parse(e.to_string()));
            pts.push(Point::new(parse(x)?, parse(y)?));
        }
        Ok(pts)
    }
}

fn check_intensity(lambda: f64) -> Result<(), SampleError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(SampleError::InvalidIntensity(lambda))
    }
}

pub fn check_window(space: SpaceKind, radius: f64) -> Result<(), SampleError> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(SampleError::InvalidWindow(radius));
    }
    if space.is_hyperbolic() && radius > MAX_HYPERBOLIC_WINDOW {
        return Err(SampleError::WindowTooLarge { radius });
    }
    Ok(())
}

/// Distance from the origin of a point uniform (w.r.t. volume) in `B(o, R)`,
/// given `u ~ U(0,1)`. Hyperbolic case solves `cosh r = 1 + u (cosh R - 1)`.
#[inline]
fn radial_inverse(space: SpaceKind, radius: f64, u: f64) -> f64 {
    match space {
        SpaceKind::EuclideanPlane => radius * u.sqrt(),
        SpaceKind::HyperbolicPoincareDisk => 2.0 * (u.sqrt() * (0.5 * radius).sinh()).asinh(),
    }
}

/// One point uniform in `B(o, radius)` with respect to the Riemannian volume.
pub fn uniform_in_ball<R: Rng + ?Sized>(space: SpaceKind, radius: f64, rng: &mut R) -> Point {
    let u: f64 = rng.random();
    let theta = 2.0 * PI * rng.random::<f64>();
    let r = radial_inverse(space, radius, u);
    Point::polar(space.chart_radius(r), theta)
}

/// Drops points that coincide (within [`COINCIDENCE_TOL`]) with an earlier one.
fn drop_coincident(points: &mut Vec<Point>) {
    if points.len() < 2 {
        return;
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
    let mut dead = vec![false; points.len()];
    for (k, &i) in order.iter().enumerate() {
        if dead[i] {
            continue;
        }
        for &j in &order[k + 1..] {
            if points[j].x - points[i].x > COINCIDENCE_TOL {
                break;
            }
            if (points[j].y - points[i].y).abs() <= COINCIDENCE_TOL {
                // keep the earlier index
                let later = i.max(j);
                dead[later] = true;
            }
        }
    }
    if dead.iter().any(|&d| d) {
        let mut idx = 0;
        points.retain(|_| {
            let keep = !dead[idx];
            idx += 1;
            keep
        });
    }
}

/// Poisson process of intensity `lambda * Vol` restricted to `B(o, R)`.
pub fn sample_poisson(
    space: SpaceKind,
    lambda: f64,
    window_radius: f64,
    seed: u64,
) -> Result<PointSample, SampleError> {
    check_intensity(lambda)?;
    check_window(space, window_radius)?;
    let mut rng = rng_from_seed(seed);
    let mean = lambda * space.ball_volume_unchecked(window_radius);
    let count = if mean > 0.0 {
        Poisson::new(mean).map_err(|_| SampleError::InvalidIntensity(lambda))?.sample(&mut rng) as usize
    } else {
        0
    };
    let mut points: Vec<Point> = (0..count).map(|_| uniform_in_ball(space, window_radius, &mut rng)).collect();
    drop_coincident(&mut points);
    Ok(PointSample { space, points, window_radius, kind: ProcessKind::Poisson { lambda }, seed })
}

/// Adjoins the origin (as index 0) to a Poisson sample.
pub fn palmify(sample: PointSample) -> Result<PointSample, SampleError> {
    let lambda = match sample.kind {
        ProcessKind::Poisson { lambda } => lambda,
        ProcessKind::PalmPoisson { .. } => return Err(SampleError::AlreadyPalm),
        ProcessKind::KacGaf { .. } => return Err(SampleError::NotPoisson),
    };
    let mut points = Vec::with_capacity(sample.points.len() + 1);
    points.push(Point::ORIGIN);
    points.extend(sample.points.into_iter().filter(|p| p.norm() > COINCIDENCE_TOL));
    Ok(PointSample { points, kind: ProcessKind::PalmPoisson { lambda }, ..sample })
}

pub fn sample_palm_poisson(
    space: SpaceKind,
    lambda: f64,
    window_radius: f64,
    seed: u64,
) -> Result<PointSample, SampleError> {
    palmify(sample_poisson(space, lambda, window_radius, seed)?)
}

/// Poisson points ordered by distance from the origin, generated lazily:
/// `f(r_k) = (E_1 + ... + E_k) / lambda` with i.i.d. unit exponentials.
pub struct RadialPoisson<R> {
    space: SpaceKind,
    lambda: f64,
    area: f64,
    rng: R,
}

impl<R: Rng> RadialPoisson<R> {
    pub fn new(space: SpaceKind, lambda: f64, rng: R) -> Result<Self, SampleError> {
        check_intensity(lambda)?;
        Ok(RadialPoisson { space, lambda, area: 0.0, rng })
    }
}

impl<R: Rng> Iterator for RadialPoisson<R> {
    /// `(distance from origin, chart point)`.
    type Item = (f64, Point);

    fn next(&mut self) -> Option<(f64, Point)> {
        let e: f64 = Exp1.sample(&mut self.rng);
        self.area += e / self.lambda;
        let r = self.space.inverse_ball_volume(self.area).ok()?;
        let theta = 2.0 * PI * self.rng.random::<f64>();
        Some((r, Point::polar(self.space.chart_radius(r), theta)))
    }
}

/// Roots inside the unit disk of `sum a_k z^k` with i.i.d. standard complex
/// Gaussian coefficients.
pub fn sample_kac_gaf(degree: u32, seed: u64) -> Result<PointSample, SampleError> {
    if degree < 1 {
        return Err(SampleError::InvalidDegree { degree, min: 1 });
    }
    let mut rng = rng_from_seed(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let coeffs: Vec<Complex64> = (0..=degree)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(scale * re, scale * im)
        })
        .collect();
    let poly = ComplexPolynomial::new(coeffs)?;
    let roots = poly.roots()?;
    let points: Vec<Point> =
        roots.into_iter().filter(|z| 1.0 - z.norm_sqr() > CHART_GUARD).map(Point::from_complex).collect();
    let window_radius = points.iter().map(|&p| SpaceKind::HyperbolicPoincareDisk.origin_dist(p)).fold(0.0, f64::max);
    Ok(PointSample {
        space: SpaceKind::HyperbolicPoincareDisk,
        points,
        window_radius,
        kind: ProcessKind::KacGaf { degree },
        seed,
    })
}

/// Intensity `1/(4 pi)` of the hyperbolic GAF zero set and the window whose
/// expected Poisson count equals the expected in-disk root count `degree/2`.
pub fn matched_poisson_params(degree: u32) -> Result<(f64, f64), SampleError> {
    if degree < 2 {
        return Err(SampleError::InvalidDegree { degree, min: 2 });
    }
    let lambda = 1.0 / (4.0 * PI);
    let radius = SpaceKind::HyperbolicPoincareDisk.inverse_ball_volume(0.5 * degree as f64 / lambda)?;
    Ok((lambda, radius))
}
