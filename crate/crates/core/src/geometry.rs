//! Plane geometry of constant curvature 0 and -1.
//!
//! The hyperbolic plane is represented in the Poincaré disk chart with
//! curvature -1. Hyperbolic disks are Euclidean disks in this chart, which is
//! what lets the Delaunay machinery in [`crate::tess`] work on raw chart
//! coordinates.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Minimum admissible value of `1 - |z|^2` for a hyperbolic chart point.
pub const CHART_GUARD: f64 = 1e-12;

/// Largest hyperbolic window radius accepted by the samplers.
pub const MAX_HYPERBOLIC_WINDOW: f64 = 12.0;

/// Chart points closer than this are treated as the same point.
pub const COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point ({x}, {y}) is outside the usable disk chart (1 - |z|^2 <= {CHART_GUARD})")]
    OutsideChart { x: f64, y: f64 },
    #[error("length must be nonnegative, got {0}")]
    NegativeLength(f64),
    #[error("area must be nonnegative, got {0}")]
    NegativeArea(f64),
    #[error("points are collinear; no circumcircle")]
    DegenerateCircle,
    #[error("circumdisk is not contained in the unit disk; no compact witness ball")]
    UnboundedWitness,
    #[error("polygon is not simple")]
    SelfIntersecting,
    #[error("polygon needs at least three distinct vertices")]
    TooFewVertices,
}

/// The model space. Curvature is 0 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    #[serde(rename = "euclidean")]
    EuclideanPlane,
    #[serde(rename = "hyperbolic")]
    HyperbolicPoincareDisk,
}

/// A point in chart coordinates (the plane itself, or the unit disk).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        Point::new(radius * angle.cos(), radius * angle.sin())
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    #[inline]
    pub fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    #[inline]
    pub fn from_complex(z: Complex64) -> Self {
        Point::new(z.re, z.im)
    }

    pub(crate) fn coord(self) -> robust::Coord<f64> {
        robust::Coord { x: self.x, y: self.y }
    }
}

/// Poincaré disk to Klein disk. Geodesics become straight chords.
#[inline]
pub fn poincare_to_klein(p: Point) -> Point {
    p.scale(2.0 / (1.0 + p.norm_sq()))
}

#[inline]
pub fn klein_to_poincare(k: Point) -> Point {
    k.scale(1.0 / (1.0 + (1.0 - k.norm_sq()).max(0.0).sqrt()))
}

impl SpaceKind {
    pub fn is_hyperbolic(self) -> bool {
        matches!(self, SpaceKind::HyperbolicPoincareDisk)
    }

    /// Rejects hyperbolic points too close to the ideal boundary.
    pub fn check(self, p: Point) -> Result<(), GeometryError> {
        let ok = p.x.is_finite()
            && p.y.is_finite()
            && match self {
                SpaceKind::EuclideanPlane => true,
                SpaceKind::HyperbolicPoincareDisk => 1.0 - p.norm_sq() > CHART_GUARD,
            };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::OutsideChart { x: p.x, y: p.y })
        }
    }

    pub fn dist(self, p: Point, q: Point) -> Result<f64, GeometryError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.dist_unchecked(p, q))
    }

    /// Distance without the chart guard; for inner loops over validated samples.
    #[inline]
    pub fn dist_unchecked(self, p: Point, q: Point) -> f64 {
        let d2 = p.sub(q).norm_sq();
        match self {
            SpaceKind::EuclideanPlane => d2.sqrt(),
            // cosh d = 1 + 2 s^2, i.e. sinh(d/2) = s; the asinh form keeps
            // precision for short distances.
            SpaceKind::HyperbolicPoincareDisk => {
                let s2 = d2 / ((1.0 - p.norm_sq()) * (1.0 - q.norm_sq()));
                2.0 * s2.sqrt().asinh()
            }
        }
    }

    /// Distance from the chart origin.
    #[inline]
    pub fn origin_dist(self, p: Point) -> f64 {
        match self {
            SpaceKind::EuclideanPlane => p.norm(),
            SpaceKind::HyperbolicPoincareDisk => 2.0 * p.norm().atanh(),
        }
    }

    /// Chart radius of the ball `B(o, r)`.
    #[inline]
    pub fn chart_radius(self, r: f64) -> f64 {
        match self {
            SpaceKind::EuclideanPlane => r,
            SpaceKind::HyperbolicPoincareDisk => (0.5 * r).tanh(),
        }
    }

    pub fn geodesic_midpoint(self, p: Point, q: Point) -> Result<Point, GeometryError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.midpoint_unchecked(p, q))
    }

    pub(crate) fn midpoint_unchecked(self, p: Point, q: Point) -> Point {
        match self {
            SpaceKind::EuclideanPlane => Point::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y)),
            // the formula below is only ulp-accurate at p = q
            SpaceKind::HyperbolicPoincareDisk if p == q => p,
            SpaceKind::HyperbolicPoincareDisk => {
                // normalized sum of the hyperboloid lifts, projected back:
                // (u p + v q) / (sqrt(1 + s^2) + u + v - 1), u = 1/(1-|p|^2)
                let u = 1.0 / (1.0 - p.norm_sq());
                let v = 1.0 / (1.0 - q.norm_sq());
                let s2 = p.sub(q).norm_sq() * u * v;
                p.scale(u).add(q.scale(v)).scale(1.0 / ((1.0 + s2).sqrt() + u + v - 1.0))
            }
        }
    }

    /// Volume growth `f(r) = Vol(B(o, r))`.
    pub fn ball_volume(self, r: f64) -> Result<f64, GeometryError> {
        if !(r >= 0.0) {
            return Err(GeometryError::NegativeLength(r));
        }
        Ok(self.ball_volume_unchecked(r))
    }

    #[inline]
    pub(crate) fn ball_volume_unchecked(self, r: f64) -> f64 {
        match self {
            SpaceKind::EuclideanPlane => PI * r * r,
            SpaceKind::HyperbolicPoincareDisk => {
                let s = (0.5 * r).sinh();
                4.0 * PI * s * s
            }
        }
    }

    pub fn inverse_ball_volume(self, area: f64) -> Result<f64, GeometryError> {
        if !(area >= 0.0) {
            return Err(GeometryError::NegativeArea(area));
        }
        Ok(match self {
            SpaceKind::EuclideanPlane => (area / PI).sqrt(),
            SpaceKind::HyperbolicPoincareDisk => 2.0 * (area / (4.0 * PI)).sqrt().asinh(),
        })
    }

    /// Metric circumcircle `(center, radius)` of three points.
    pub fn circumcircle(self, p1: Point, p2: Point, p3: Point) -> Result<(Point, f64), GeometryError> {
        for p in [p1, p2, p3] {
            self.check(p)?;
        }
        let (c, rho) = euclidean_circumdisk(p1, p2, p3).ok_or(GeometryError::DegenerateCircle)?;
        match self {
            SpaceKind::EuclideanPlane => Ok((c, rho)),
            SpaceKind::HyperbolicPoincareDisk => hyperbolic_disk_from_chart(c, rho),
        }
    }

    pub fn polygon_area(self, poly: &GeodesicPolygon) -> Result<f64, GeometryError> {
        poly.validate()?;
        Ok(self.polygon_area_unchecked(&poly.vertices))
    }

    /// Signed area; counterclockwise polygons are positive.
    pub(crate) fn polygon_area_unchecked(self, vertices: &[Point]) -> f64 {
        let n = vertices.len();
        if n < 3 {
            return 0.0;
        }
        match self {
            SpaceKind::EuclideanPlane => {
                let o = vertices[0];
                let mut twice = 0.0;
                for i in 1..n - 1 {
                    let a = vertices[i].sub(o);
                    let b = vertices[i + 1].sub(o);
                    twice += a.x * b.y - a.y * b.x;
                }
                0.5 * twice
            }
            SpaceKind::HyperbolicPoincareDisk => {
                // Fan from vertex 0 after moving it to the origin; the triangle
                // (0, z1, z2) has signed area -2 arg(1 - conj(z1) z2).
                let to_origin = Isometry::to_origin(self, vertices[0]);
                let moved: Vec<Complex64> = vertices[1..].iter().map(|&v| to_origin.apply(v).to_complex()).collect();
                moved.windows(2).map(|w| -2.0 * (1.0 - w[0].conj() * w[1]).arg()).sum()
            }
        }
    }

    pub fn isometry_to_origin(self, p: Point) -> Result<Isometry, GeometryError> {
        self.check(p)?;
        Ok(Isometry::to_origin(self, p))
    }
}

/// Euclidean circumdisk of three chart points, `None` when collinear.
pub(crate) fn euclidean_circumdisk(a: Point, b: Point, c: Point) -> Option<(Point, f64)> {
    if robust::orient2d(a.coord(), b.coord(), c.coord()) == 0.0 {
        return None;
    }
    let bp = b.sub(a);
    let cp = c.sub(a);
    let d = 2.0 * (bp.x * cp.y - bp.y * cp.x);
    let b2 = bp.norm_sq();
    let c2 = cp.norm_sq();
    let ux = (cp.y * b2 - bp.y * c2) / d;
    let uy = (bp.x * c2 - cp.x * b2) / d;
    let u = Point::new(ux, uy);
    Some((a.add(u), u.norm()))
}

/// Converts a chart disk contained in the unit disk to its hyperbolic center
/// and radius.
pub(crate) fn hyperbolic_disk_from_chart(c: Point, rho: f64) -> Result<(Point, f64), GeometryError> {
    let cn = c.norm();
    if cn + rho >= 1.0 - 0.5 * CHART_GUARD {
        return Err(GeometryError::UnboundedWitness);
    }
    if cn < 1e-300 {
        return Ok((Point::ORIGIN, 2.0 * rho.atanh()));
    }
    let near = 2.0 * (cn - rho).atanh();
    let far = 2.0 * (cn + rho).atanh();
    let center_dist = 0.5 * (near + far);
    let center = c.scale((0.5 * center_dist).tanh() / cn);
    Ok((center, 0.5 * (far - near)))
}

/// A geodesic polygon, vertices in counterclockwise order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPolygon {
    pub vertices: Vec<Point>,
    pub space: SpaceKind,
}

impl GeodesicPolygon {
    pub fn new(space: SpaceKind, vertices: Vec<Point>) -> Self {
        GeodesicPolygon { vertices, space }
    }

    pub fn area(&self) -> Result<f64, GeometryError> {
        self.space.polygon_area(self)
    }

    /// Vertices in a chart where edges are straight segments.
    pub fn straight_chart(&self) -> Vec<Point> {
        match self.space {
            SpaceKind::EuclideanPlane => self.vertices.clone(),
            SpaceKind::HyperbolicPoincareDisk => self.vertices.iter().map(|&v| poincare_to_klein(v)).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices);
        }
        for &v in &self.vertices {
            self.space.check(v)?;
        }
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if a.sub(b).norm() <= COINCIDENCE_TOL {
                return Err(GeometryError::TooFewVertices);
            }
        }
        let k = self.straight_chart();
        for i in 0..n {
            for j in i + 1..n {
                // skip edges that share a vertex
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_intersect(k[i], k[(i + 1) % n], k[j], k[(j + 1) % n]) {
                    return Err(GeometryError::SelfIntersecting);
                }
            }
        }
        Ok(())
    }

    /// Point-in-polygon for convex counterclockwise polygons (boundary counts
    /// as inside).
    pub fn contains_convex(&self, p: Point) -> bool {
        let q = match self.space {
            SpaceKind::EuclideanPlane => p,
            SpaceKind::HyperbolicPoincareDisk => poincare_to_klein(p),
        };
        let k = self.straight_chart();
        convex_contains(&k, q)
    }
}

pub(crate) fn convex_contains(straight: &[Point], q: Point) -> bool {
    let n = straight.len();
    (0..n).all(|i| {
        let a = straight[i];
        let b = straight[(i + 1) % n];
        robust::orient2d(a.coord(), b.coord(), q.coord()) >= 0.0
    })
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = robust::orient2d(a.coord(), b.coord(), c.coord());
    let o2 = robust::orient2d(a.coord(), b.coord(), d.coord());
    let o3 = robust::orient2d(c.coord(), d.coord(), a.coord());
    let o4 = robust::orient2d(c.coord(), d.coord(), b.coord());
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (o1 == 0.0 && on(a, b, c)) || (o2 == 0.0 && on(a, b, d)) || (o3 == 0.0 && on(c, d, a)) || (o4 == 0.0 && on(c, d, b))
}

/// An isometry of the plane or of the disk, optionally orientation reversing.
///
/// Euclidean: `z -> rot * w + shift`. Hyperbolic: `z -> rot * (w + c) /
/// (1 + conj(c) w)` with `|rot| = 1` and `|c| < 1`. In both cases `w` is
/// `conj(z)` when `flip` is set and `z` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Isometry {
    Euclidean { rot: Complex64, shift: Complex64, flip: bool },
    Hyperbolic { rot: Complex64, c: Complex64, flip: bool },
}

/// SU(1,1) matrix `[[a, b], [conj(b), conj(a)]]` of `rot (w + c) / (1 + conj(c) w)`.
fn to_matrix(rot: Complex64, c: Complex64) -> (Complex64, Complex64) {
    let a = rot.sqrt() / (1.0 - c.norm_sqr()).sqrt();
    (a, c * a)
}

fn from_matrix(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let rot = a / a.conj();
    (rot / rot.norm(), b / a)
}

impl Isometry {
    pub fn identity(space: SpaceKind) -> Self {
        match space {
            SpaceKind::EuclideanPlane => {
                Isometry::Euclidean { rot: Complex64::new(1.0, 0.0), shift: Complex64::new(0.0, 0.0), flip: false }
            }
            SpaceKind::HyperbolicPoincareDisk => {
                Isometry::Hyperbolic { rot: Complex64::new(1.0, 0.0), c: Complex64::new(0.0, 0.0), flip: false }
            }
        }
    }

    /// Rotation by `angle` followed by translation.
    pub fn euclidean(angle: f64, shift: Point, flip: bool) -> Self {
        Isometry::Euclidean { rot: Complex64::from_polar(1.0, angle), shift: shift.to_complex(), flip }
    }

    /// `z -> e^{i angle} (z - center) / (1 - conj(center) z)`.
    pub fn disk_automorphism(angle: f64, center: Point, flip: bool) -> Self {
        Isometry::Hyperbolic { rot: Complex64::from_polar(1.0, angle), c: -center.to_complex(), flip }
    }

    /// Translation along the real axis moving the origin to distance `t`
    /// (negative `t` moves toward the negative axis).
    pub fn axis_translation(space: SpaceKind, t: f64) -> Self {
        match space {
            SpaceKind::EuclideanPlane => Isometry::euclidean(0.0, Point::new(t, 0.0), false),
            SpaceKind::HyperbolicPoincareDisk => {
                Isometry::disk_automorphism(0.0, Point::new(-(0.5 * t).tanh(), 0.0), false)
            }
        }
    }

    pub fn rotation(space: SpaceKind, angle: f64) -> Self {
        match space {
            SpaceKind::EuclideanPlane => Isometry::euclidean(angle, Point::ORIGIN, false),
            SpaceKind::HyperbolicPoincareDisk => Isometry::disk_automorphism(angle, Point::ORIGIN, false),
        }
    }

    pub(crate) fn to_origin(space: SpaceKind, p: Point) -> Self {
        match space {
            SpaceKind::EuclideanPlane => Isometry::euclidean(0.0, p.scale(-1.0), false),
            SpaceKind::HyperbolicPoincareDisk => Isometry::disk_automorphism(0.0, p, false),
        }
    }

    pub fn space(&self) -> SpaceKind {
        match self {
            Isometry::Euclidean { .. } => SpaceKind::EuclideanPlane,
            Isometry::Hyperbolic { .. } => SpaceKind::HyperbolicPoincareDisk,
        }
    }

    pub fn is_flip(&self) -> bool {
        match *self {
            Isometry::Euclidean { flip, .. } | Isometry::Hyperbolic { flip, .. } => flip,
        }
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        Point::from_complex(self.apply_complex(p.to_complex()))
    }

    #[inline]
    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        match *self {
            Isometry::Euclidean { rot, shift, flip } => rot * if flip { z.conj() } else { z } + shift,
            Isometry::Hyperbolic { rot, c, flip } => {
                let w = if flip { z.conj() } else { z };
                rot * (w + c) / (1.0 + c.conj() * w)
            }
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        match (*self, *other) {
            (
                Isometry::Euclidean { rot: r1, shift: s1, flip: f1 },
                Isometry::Euclidean { rot: r2, shift: s2, flip: f2 },
            ) => {
                let (r2, s2) = if f1 { (r2.conj(), s2.conj()) } else { (r2, s2) };
                Isometry::Euclidean { rot: r1 * r2, shift: r1 * s2 + s1, flip: f1 ^ f2 }
            }
            (Isometry::Hyperbolic { rot: r1, c: c1, flip: f1 }, Isometry::Hyperbolic { rot: r2, c: c2, flip: f2 }) => {
                // conj . M = conj(M) . conj
                let (r2, c2) = if f1 { (r2.conj(), c2.conj()) } else { (r2, c2) };
                let (a1, b1) = to_matrix(r1, c1);
                let (a2, b2) = to_matrix(r2, c2);
                let (rot, c) = from_matrix(a1 * a2 + b1 * b2.conj(), a1 * b2 + b1 * a2.conj());
                Isometry::Hyperbolic { rot, c, flip: f1 ^ f2 }
            }
            _ => panic!("cannot compose isometries of different spaces"),
        }
    }

    pub fn inverse(&self) -> Isometry {
        match *self {
            Isometry::Euclidean { rot, shift, flip } => {
                if flip {
                    Isometry::Euclidean { rot, shift: -(rot * shift.conj()), flip }
                } else {
                    let r = rot.conj();
                    Isometry::Euclidean { rot: r, shift: -(r * shift), flip }
                }
            }
            Isometry::Hyperbolic { rot, c, flip } => {
                // (M . F)^-1 = F . M^-1 = conj(M^-1) . F
                let (a, b) = to_matrix(rot, c);
                let (a, b) = if flip { (a, -b.conj()) } else { (a.conj(), -b) };
                let (rot, c) = from_matrix(a, b);
                Isometry::Hyperbolic { rot, c, flip }
            }
        }
    }

    /// `d(o, g(p))`, accurate even when `g(p)` lies beyond the usable chart.
    pub fn origin_distance(&self, p: Point) -> f64 {
        match *self {
            Isometry::Euclidean { .. } => self.apply(p).norm(),
            Isometry::Hyperbolic { c, flip, .. } => {
                // d(o, g(p)) = d(-c, w)
                let w = if flip { p.to_complex().conj() } else { p.to_complex() };
                let s = (w + c).norm() / ((1.0 - w.norm_sqr()) * (1.0 - c.norm_sqr())).sqrt();
                2.0 * s.asinh()
            }
        }
    }
}
