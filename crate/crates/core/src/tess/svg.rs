//! SVG path fragments for geodesics and cells. Hyperbolic geodesics are chart
//! circular arcs orthogonal to the unit circle.

use std::fmt::Write;

use robust::orient2d;

use crate::geometry::{euclidean_circumdisk, Point, SpaceKind};

use super::VoronoiCell;

/// Maps chart coordinates to SVG user units (y axis pointing down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgFrame {
    pub center_x: f64,
    pub center_y: f64,
    pub scale: f64,
}

impl SvgFrame {
    pub fn map(&self, p: Point) -> (f64, f64) {
        (self.center_x + self.scale * p.x, self.center_y - self.scale * p.y)
    }
}

/// Path command drawing the geodesic from the current point `p` to `q`.
pub fn geodesic_svg_command(space: SpaceKind, p: Point, q: Point, frame: &SvgFrame) -> String {
    let (qx, qy) = frame.map(q);
    if space.is_hyperbolic() {
        let np = p.norm_sq();
        let nq = q.norm_sq();
        let (anchor, other) = if np >= nq { (p, q) } else { (q, p) };
        if anchor.norm_sq() > 1e-18 {
            let inverse = anchor.scale(1.0 / anchor.norm_sq());
            if let Some((_, r)) = euclidean_circumdisk(anchor, other, inverse) {
                let m = space.midpoint_unchecked(p, q);
                // chart-counterclockwise traversal is clockwise on screen
                let sweep = u8::from(orient2d(p.coord(), m.coord(), q.coord()) > 0.0);
                return format!("A{:.4} {:.4} 0 0 {} {:.4} {:.4}", r * frame.scale, r * frame.scale, sweep, qx, qy);
            }
        }
    }
    format!("L{qx:.4} {qy:.4}")
}

/// Closed SVG path data of a bounded cell; `None` for unbounded cells.
pub fn cell_svg_path(cell: &VoronoiCell, frame: &SvgFrame) -> Option<String> {
    let verts = &cell.polygon.vertices;
    if !cell.bounded || verts.len() < 2 {
        return None;
    }
    let space = cell.polygon.space;
    let (x0, y0) = frame.map(verts[0]);
    let mut d = format!("M{x0:.4} {y0:.4}");
    for (i, &v) in verts.iter().enumerate() {
        let next = verts[(i + 1) % verts.len()];
        let _ = write!(d, " {}", geodesic_svg_command(space, v, next, frame));
    }
    d.push_str(" Z");
    Some(d)
}
