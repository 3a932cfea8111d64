//! Brute-force Delaunay oracle: a pair is an edge iff some open disk with
//! both points on its boundary contains no sample point (and, in the
//! hyperbolic chart, lies inside the unit disk).

use dlattice::geometry::{Point, SpaceKind};

const INSIDE_TOL: f64 = 1e-12;
const PENCIL_STEPS: usize = 4000;

fn circumdisk(a: Point, b: Point, c: Point) -> Option<(Point, f64)> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if d.abs() < 1e-300 {
        return None;
    }
    let a2 = a.x * a.x + a.y * a.y;
    let b2 = b.x * b.x + b.y * b.y;
    let c2 = c.x * c.x + c.y * c.y;
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    let center = Point::new(ux, uy);
    Some((center, ((a.x - ux).powi(2) + (a.y - uy).powi(2)).sqrt()))
}

fn empty(points: &[Point], skip: &[usize], center: Point, r: f64) -> bool {
    points.iter().enumerate().all(|(k, p)| {
        skip.contains(&k) || ((p.x - center.x).powi(2) + (p.y - center.y).powi(2)).sqrt() >= r * (1.0 - INSIDE_TOL)
    })
}

fn admissible(space: SpaceKind, center: Point, r: f64) -> bool {
    match space {
        SpaceKind::EuclideanPlane => true,
        SpaceKind::HyperbolicPoincareDisk => (center.x.powi(2) + center.y.powi(2)).sqrt() + r < 1.0,
    }
}

pub fn brute_force_edges(space: SpaceKind, points: &[Point]) -> Vec<(u32, u32)> {
    let n = points.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points[i], points[j]);
            let mut found = false;
            // disks through a third point
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                if let Some((c, r)) = circumdisk(a, b, points[k]) {
                    if admissible(space, c, r) && empty(points, &[i, j, k], c, r) {
                        found = true;
                        break;
                    }
                }
            }
            // the rest of the pencil of disks through a and b
            if !found {
                let m = Point::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
                let h = 0.5 * ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
                let nx = -(b.y - a.y) / (2.0 * h);
                let ny = (b.x - a.x) / (2.0 * h);
                let span = match space {
                    SpaceKind::EuclideanPlane => 1e3 * (1.0 + h),
                    SpaceKind::HyperbolicPoincareDisk => 1.0,
                };
                for step in 0..=PENCIL_STEPS {
                    let s = span * (2.0 * step as f64 / PENCIL_STEPS as f64 - 1.0);
                    let c = Point::new(m.x + s * nx, m.y + s * ny);
                    let r = (h * h + s * s).sqrt();
                    if admissible(space, c, r) && empty(points, &[i, j], c, r) {
                        found = true;
                        break;
                    }
                }
            }
            if found {
                edges.push((i as u32, j as u32));
            }
        }
    }
    edges
}
