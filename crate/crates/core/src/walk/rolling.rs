//! Random walk on the Palm–Poisson Delaunay graph of the whole space.
//!
//! The process is revealed in patches: a patch is a Poisson sample of a ball
//! `B(c, patch_radius)`, thinned to the part not covered by earlier patches,
//! so the union of patches is one Poisson process on the union of balls.
//! Coordinates are kept relative to a moving frame centred near the walker;
//! each patch stores the isometry from its own frame to the current one.
//! Whenever the walker reaches a vertex whose neighbourhood is not certified
//! by the local triangulation, the frame is recentred there, a new patch is
//! added if the view ball is not covered, and the view ball is retriangulated.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::geometry::{Point, SpaceKind, MAX_HYPERBOLIC_WINDOW};
use crate::pointproc::uniform_in_ball;
use crate::rng::rng_from_seed;
use crate::tess::delaunay_points;

use super::{BallExclusion, WalkError, WalkTrace};

/// Expected number of points in the view ball.
const VIEW_POINTS: f64 = 600.0;
/// Expected number of points in the ball whose radius is added to the view
/// radius to get the patch radius.
const PATCH_MARGIN_POINTS: f64 = 12.0;
/// Hyperbolic patches farther than this are dropped; composed frames lose
/// accuracy at larger distances.
const HYPERBOLIC_PRUNE: f64 = 24.0;
/// Rescaling threshold for the root frame entries.
const RESCALE: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollingParams {
    /// Radius of the triangulated ball around the frame centre.
    pub view_radius: f64,
    /// Radius of each revealed patch; exceeds `view_radius`.
    pub patch_radius: f64,
    /// Patches whose centre is farther than this from the walker are dropped.
    pub prune_radius: f64,
}

impl RollingParams {
    pub fn for_intensity(space: SpaceKind, lambda: f64) -> Result<Self, WalkError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(WalkError::InvalidParameter(format!("intensity must be positive, got {lambda}")));
        }
        let view = space.inverse_ball_volume(VIEW_POINTS / lambda).map_err(crate::tess::TessError::from)?;
        let margin = space.inverse_ball_volume(PATCH_MARGIN_POINTS / lambda).map_err(crate::tess::TessError::from)?;
        let patch = view + margin;
        let prune = match space {
            SpaceKind::EuclideanPlane => f64::INFINITY,
            SpaceKind::HyperbolicPoincareDisk => HYPERBOLIC_PRUNE.max(patch + view + 1.0),
        };
        let params = RollingParams { view_radius: view, patch_radius: patch, prune_radius: prune };
        params.validate(space)?;
        Ok(params)
    }

    fn validate(&self, space: SpaceKind) -> Result<(), WalkError> {
        let ok = self.view_radius > 0.0
            && self.patch_radius > self.view_radius
            && self.prune_radius >= self.patch_radius + self.view_radius
            && (!space.is_hyperbolic() || self.patch_radius <= MAX_HYPERBOLIC_WINDOW);
        if ok {
            Ok(())
        } else {
            Err(WalkError::InvalidParameter(format!("inconsistent rolling parameters {self:?}")))
        }
    }
}

/// Euclidean: `z -> z + b`. Hyperbolic: `z -> (a z + b) / (conj(b) z + conj(a))`
/// with `|a|^2 - |b|^2 = 1` up to rounding.
#[derive(Debug, Clone, Copy)]
struct Frame {
    a: Complex64,
    b: Complex64,
}

impl Frame {
    const IDENTITY: Frame = Frame { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0) };

    /// Isometry sending `x` to the origin.
    fn to_origin(space: SpaceKind, x: Complex64) -> Frame {
        match space {
            SpaceKind::EuclideanPlane => Frame { a: Complex64::new(1.0, 0.0), b: -x },
            SpaceKind::HyperbolicPoincareDisk => {
                let s = (1.0 - x.norm_sqr()).sqrt();
                Frame { a: Complex64::new(1.0 / s, 0.0), b: -x / s }
            }
        }
    }

    /// `m ∘ self`.
    fn then(&self, space: SpaceKind, m: &Frame) -> Frame {
        match space {
            SpaceKind::EuclideanPlane => Frame { a: self.a, b: self.b + m.b },
            SpaceKind::HyperbolicPoincareDisk => {
                Frame { a: m.a * self.a + m.b * self.b.conj(), b: m.a * self.b + m.b * self.a.conj() }
            }
        }
    }

    fn apply(&self, space: SpaceKind, z: Complex64) -> Complex64 {
        match space {
            SpaceKind::EuclideanPlane => z + self.b,
            SpaceKind::HyperbolicPoincareDisk => (self.a * z + self.b) / (self.b.conj() * z + self.a.conj()),
        }
    }

    fn preimage_of_origin(&self, space: SpaceKind) -> Complex64 {
        match space {
            SpaceKind::EuclideanPlane => -self.b,
            SpaceKind::HyperbolicPoincareDisk => -self.b / self.a,
        }
    }

    /// Distance from the origin to the image of the origin.
    fn shift_length(&self, space: SpaceKind) -> f64 {
        match space {
            SpaceKind::EuclideanPlane => self.b.norm(),
            SpaceKind::HyperbolicPoincareDisk => 2.0 * self.b.norm().asinh(),
        }
    }
}

struct Patch {
    id: u64,
    frame: Frame,
    /// Coordinates in the patch's own frame.
    points: Vec<Complex64>,
    /// Centre in the current frame and its distance from the origin.
    center: Complex64,
    center_dist: f64,
}

struct Environment {
    space: SpaceKind,
    lambda: f64,
    params: RollingParams,
    patches: Vec<Patch>,
    next_id: u64,
    /// Root frame to current frame; true entries are `exp(log_scale)` times these.
    root: Frame,
    log_scale: f64,
}

impl Environment {
    fn recenter(&mut self, x: Complex64) {
        let space = self.space;
        let m = Frame::to_origin(space, x);
        for p in &mut self.patches {
            p.frame = p.frame.then(space, &m);
            p.center = p.frame.apply(space, Complex64::new(0.0, 0.0));
            p.center_dist = p.frame.shift_length(space);
        }
        let prune = self.params.prune_radius;
        self.patches.retain(|p| p.center_dist <= prune);
        self.root = self.root.then(space, &m);
        if self.root.a.norm() > RESCALE {
            self.root.a /= RESCALE;
            self.root.b /= RESCALE;
            self.log_scale += RESCALE.ln();
        }
    }

    fn covered(&self) -> bool {
        let reach = self.params.patch_radius - self.params.view_radius;
        self.patches.iter().any(|p| p.center_dist <= reach)
    }

    /// Adds a patch centred at the current origin, thinned against the
    /// existing patches; `with_origin` adjoins the Palm atom.
    fn add_patch<R: Rng>(&mut self, rng: &mut R, with_origin: bool) {
        let space = self.space;
        let radius = self.params.patch_radius;
        let mean = self.lambda * space.ball_volume_unchecked(radius);
        let count = Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0);
        let near = BallExclusion::new(
            space,
            radius,
            self.patches.iter().rev().filter(|p| p.center_dist < 2.0 * radius).map(|p| Point::from_complex(p.center)),
        );
        let mut points = Vec::with_capacity(count + 1);
        if with_origin {
            points.push(Complex64::new(0.0, 0.0));
        }
        for _ in 0..count {
            let q = uniform_in_ball(space, radius, rng);
            if near.admits(q) {
                points.push(q.to_complex());
            }
        }
        self.patches.push(Patch {
            id: self.next_id,
            frame: Frame::IDENTITY,
            points,
            center: Complex64::new(0.0, 0.0),
            center_dist: 0.0,
        });
        self.next_id += 1;
    }

    /// Points of the view ball in current coordinates with their global ids.
    fn view(&self) -> (Vec<Point>, Vec<u64>) {
        let space = self.space;
        let view = self.params.view_radius;
        let mut pts = Vec::new();
        let mut ids = Vec::new();
        for p in self.patches.iter().filter(|p| p.center_dist < self.params.patch_radius + view) {
            // the view ball seen from the patch frame
            let ball = BallExclusion::new(space, view, [Point::from_complex(p.frame.preimage_of_origin(space))]);
            for (i, &z) in p.points.iter().enumerate() {
                if !ball.admits(Point::from_complex(z)) {
                    pts.push(Point::from_complex(p.frame.apply(space, z)));
                    ids.push(p.id << 32 | i as u64);
                }
            }
        }
        (pts, ids)
    }

    /// Distance from the root to the point `u` of the current frame.
    fn root_distance(&self, u: Point) -> f64 {
        let space = self.space;
        let z = u.to_complex();
        match space {
            SpaceKind::EuclideanPlane => (z - self.root.b).norm(),
            SpaceKind::HyperbolicPoincareDisk => {
                // preimage under the root frame: [[conj a, -b], [-conj b, a]]
                let (a, b) = (self.root.a, self.root.b);
                if self.log_scale == 0.0 && b.norm() < 1e3 {
                    let w = (a.conj() * z - b) / (a - b.conj() * z);
                    if w.norm() < 0.999 {
                        return space.origin_dist(Point::from_complex(w));
                    }
                }
                let y = ((a.conj() * z - b).norm_sqr() + (a - b.conj() * z).norm_sqr()) / (1.0 - z.norm_sqr());
                // cosh d = exp(2 log_scale) y
                let ln_x = 2.0 * self.log_scale + y.ln();
                ln_x + (1.0 + (1.0 - (-2.0 * ln_x).exp()).max(0.0).sqrt()).ln()
            }
        }
    }
}

/// Simple random walk of `steps` steps from the Palm atom at the origin on
/// the Delaunay graph of a Poisson process of intensity `lambda` on the
/// whole space. Graph displacements are not tracked. The trace is censored
/// only if a recentred walker fails certification, which requires a witness
/// disk wider than the view ball.
pub fn srw_rolling(
    space: SpaceKind,
    lambda: f64,
    steps: usize,
    seed: u64,
    params: &RollingParams,
) -> Result<WalkTrace, WalkError> {
    params.validate(space)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(WalkError::InvalidParameter(format!("intensity must be positive, got {lambda}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut env = Environment {
        space,
        lambda,
        params: *params,
        patches: Vec::new(),
        next_id: 0,
        root: Frame::IDENTITY,
        log_scale: 0.0,
    };
    env.add_patch(&mut rng, true);
    let mut trace = WalkTrace {
        vertex_ids: vec![0],
        embedded_displacements: vec![0.0],
        graph_displacements: None,
        censored: false,
        seed,
    };
    let mut walker: u64 = 0;
    while trace.steps() < steps {
        if !env.covered() {
            env.add_patch(&mut rng, false);
        }
        let (pts, ids) = env.view();
        let net = delaunay_points(space, &pts, params.view_radius)?;
        let mut v = ids.iter().position(|&id| id == walker).expect("walker lies in its view ball") as u32;
        if !net.is_certified(v) {
            trace.censored = true;
            break;
        }
        while trace.steps() < steps {
            let nbrs = net.neighbors(v);
            v = nbrs[rng.random_range(0..nbrs.len())];
            trace.vertex_ids.push(ids[v as usize]);
            trace.embedded_displacements.push(env.root_distance(net.mark(v)));
            if !net.is_certified(v) {
                walker = ids[v as usize];
                env.recenter(net.mark(v).to_complex());
                break;
            }
        }
    }
    Ok(trace)
}
