//! Embedded Delaunay networks and Voronoi tessellations.
//!
//! Hyperbolic disks are Euclidean disks in the Poincaré chart, so the
//! hyperbolic Delaunay graph is built from the Euclidean Delaunay
//! triangulation of chart coordinates. A chart edge is kept in the hyperbolic
//! graph only when some empty disk through its endpoints lies inside the unit
//! disk, i.e. when a genuine hyperbolic witness ball exists.
//!
//! Certification: a vertex is certified when it is off the hull and every
//! incident triangle's circumdisk lies strictly inside the window ball. Such a
//! vertex has the same neighbours and the same Voronoi cell in every extension
//! of the sample outside the window.

mod svg;
mod tail;
mod triangulation;

use serde::{Deserialize, Serialize};

use crate::geometry::{
    hyperbolic_disk_from_chart, GeodesicPolygon, GeometryError, Point, SpaceKind, CHART_GUARD, COINCIDENCE_TOL,
};
use crate::pointproc::{PointSample, SampleError};
use triangulation::{triangulate, KernelError, Triangulation, NONE};

pub use svg::{cell_svg_path, geodesic_svg_command, SvgFrame};
pub use tail::{cell_diameter_tail, root_cell_radius, tail_table, TailRow, TailTable, TAIL_WINDOW_MARGIN};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TessError {
    #[error("sample points {0} and {1} coincide")]
    Duplicate(usize, usize),
    #[error("no certified vertices or cells")]
    EmptyCertified,
    #[error("window radius {window} too small, need at least {needed}")]
    InsufficientWindow { window: f64, needed: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub a: u32,
    pub b: u32,
    /// Geodesic midpoint of the endpoints.
    pub mark: Point,
}

/// Delaunay graph with position marks, midpoint edge marks and per-vertex
/// certification. Vertex ids are sample indices.
#[derive(Debug, Clone)]
pub struct EmbeddedNetwork {
    pub space: SpaceKind,
    pub window_radius: f64,
    marks: Vec<Point>,
    edges: Vec<NetworkEdge>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    certified: Vec<bool>,
    hull: Vec<bool>,
    core_radius: Option<f64>,
    tri: Triangulation,
    disks: Vec<(Point, f64)>,
    vertex_tri: Vec<u32>,
    collinear: bool,
}

impl EmbeddedNetwork {
    /// A network from an explicit edge list, with no triangulation behind it.
    /// Duplicate and reversed edges are merged; self-loops are rejected.
    pub fn from_edges(
        space: SpaceKind,
        window_radius: f64,
        marks: Vec<Point>,
        edges: &[(u32, u32)],
        certified: Vec<bool>,
    ) -> Result<Self, TessError> {
        let n = marks.len();
        if certified.len() != n {
            return Err(TessError::InvalidParameter("certified flags must match vertex count".into()));
        }
        let mut pairs = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b || a as usize >= n || b as usize >= n {
                return Err(TessError::InvalidParameter(format!("invalid edge ({a}, {b})")));
            }
            pairs.push((a.min(b), a.max(b)));
        }
        let mut net = EmbeddedNetwork {
            space,
            window_radius,
            marks,
            edges: Vec::new(),
            offsets: Vec::new(),
            targets: Vec::new(),
            certified,
            hull: vec![false; n],
            core_radius: None,
            tri: Triangulation::default(),
            disks: Vec::new(),
            vertex_tri: vec![NONE; n],
            collinear: false,
        };
        net.set_edges(pairs);
        Ok(net)
    }

    fn set_edges(&mut self, mut pairs: Vec<(u32, u32)>) {
        pairs.sort_unstable();
        pairs.dedup();
        let n = self.marks.len();
        let space = self.space;
        self.edges = pairs
            .iter()
            .map(|&(a, b)| NetworkEdge {
                a,
                b,
                mark: space.midpoint_unchecked(self.marks[a as usize], self.marks[b as usize]),
            })
            .collect();
        let mut deg = vec![0u32; n + 1];
        for &(a, b) in &pairs {
            deg[a as usize + 1] += 1;
            deg[b as usize + 1] += 1;
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        let mut targets = vec![0u32; 2 * pairs.len()];
        for &(a, b) in &pairs {
            targets[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            targets[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }
        for v in 0..n {
            targets[deg[v] as usize..deg[v + 1] as usize].sort_unstable();
        }
        self.offsets = deg;
        self.targets = targets;
    }

    pub fn vertex_count(&self) -> usize {
        self.marks.len()
    }

    pub fn marks(&self) -> &[Point] {
        &self.marks
    }

    pub fn mark(&self, v: u32) -> Point {
        self.marks[v as usize]
    }

    pub fn edges(&self) -> &[NetworkEdge] {
        &self.edges
    }

    /// Sorted neighbour list.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.targets[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        (self.offsets[v as usize + 1] - self.offsets[v as usize]) as usize
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn is_certified(&self, v: u32) -> bool {
        self.certified[v as usize]
    }

    pub fn certified(&self) -> &[bool] {
        &self.certified
    }

    pub fn certified_count(&self) -> usize {
        self.certified.iter().filter(|&&c| c).count()
    }

    pub fn certified_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.certified.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| i as u32)
    }

    pub fn is_hull(&self, v: u32) -> bool {
        self.hull[v as usize]
    }

    /// All points on one line; the graph is then the 1D Delaunay path.
    pub fn is_collinear(&self) -> bool {
        self.collinear
    }

    /// Counterclockwise Delaunay triangles of the chart triangulation.
    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.tri.tris
    }

    /// Embedded distance from the chart origin.
    pub fn origin_dist(&self, v: u32) -> f64 {
        self.space.origin_dist(self.marks[v as usize])
    }

    /// Restricts certification to vertices within `radius` of the origin.
    /// The restriction persists through [`certify`].
    pub fn restrict_core(&mut self, radius: f64) {
        self.core_radius = Some(radius);
        self.apply_core();
    }

    fn apply_core(&mut self) {
        if let Some(r) = self.core_radius {
            for (v, c) in self.certified.iter_mut().enumerate() {
                *c &= self.space.origin_dist(self.marks[v]) <= r;
            }
        }
    }

    fn recertify(&mut self) {
        if self.tri.tris.is_empty() {
            self.certified.iter_mut().for_each(|c| *c = false);
            return;
        }
        let limit = self.space.chart_radius(self.window_radius);
        for (v, c) in self.certified.iter_mut().enumerate() {
            *c = !self.hull[v] && self.vertex_tri[v] != NONE;
        }
        for (t, &(center, rho)) in self.tri.tris.iter().zip(&self.disks) {
            if !(center.norm() + rho < limit) {
                for &v in t {
                    self.certified[v as usize] = false;
                }
            }
        }
        self.apply_core();
    }

    /// Serializable view: `{vertices: [{id,x,y,certified}], edges: [{a,b,mx,my}], space, window_radius}`.
    pub fn to_record(&self) -> NetworkRecord {
        NetworkRecord {
            vertices: self
                .marks
                .iter()
                .enumerate()
                .map(|(i, p)| VertexRecord { id: i as u32, x: p.x, y: p.y, certified: self.certified[i] })
                .collect(),
            edges: self.edges.iter().map(|e| EdgeRecord { a: e.a, b: e.b, mx: e.mark.x, my: e.mark.y }).collect(),
            space: self.space,
            window_radius: self.window_radius,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("network record serializes")
    }

    /// Rebuilds the graph part of a network (no triangulation, so no cells).
    pub fn from_record(rec: &NetworkRecord) -> Result<Self, TessError> {
        let marks = rec.vertices.iter().map(|v| Point::new(v.x, v.y)).collect();
        let certified = rec.vertices.iter().map(|v| v.certified).collect();
        let edges: Vec<(u32, u32)> = rec.edges.iter().map(|e| (e.a, e.b)).collect();
        Self::from_edges(rec.space, rec.window_radius, marks, &edges, certified)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub a: u32,
    pub b: u32,
    pub mx: f64,
    pub my: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    pub space: SpaceKind,
    pub window_radius: f64,
}

/// Delaunay network of a sample.
pub fn delaunay(sample: &PointSample) -> Result<EmbeddedNetwork, TessError> {
    delaunay_points(sample.space, &sample.points, sample.window_radius)
}

/// Delaunay network of chart points, certified against `B(o, window_radius)`.
pub fn delaunay_points(space: SpaceKind, points: &[Point], window_radius: f64) -> Result<EmbeddedNetwork, TessError> {
    for &p in points {
        space.check(p)?;
    }
    let n = points.len();
    let mut net = EmbeddedNetwork::from_edges(space, window_radius, points.to_vec(), &[], vec![false; n])?;
    if n < 2 {
        return Ok(net);
    }
    match triangulate(points) {
        Ok(mut tri) => {
            tri.canonicalize_cocircular(points);
            net.install(tri);
            Ok(net)
        }
        Err(KernelError::Duplicate(a, b)) => Err(TessError::Duplicate(a.min(b) as usize, a.max(b) as usize)),
        Err(KernelError::Collinear) => {
            let mut order: Vec<u32> = (0..n as u32).collect();
            let (p0, p1) = (points[0], points.iter().copied().find(|&p| p != points[0]).unwrap_or(points[0]));
            let dir = p1.sub(p0);
            order.sort_by(|&i, &j| {
                let a = points[i as usize].sub(p0);
                let b = points[j as usize].sub(p0);
                (a.x * dir.x + a.y * dir.y).total_cmp(&(b.x * dir.x + b.y * dir.y))
            });
            for w in order.windows(2) {
                if points[w[0] as usize] == points[w[1] as usize] {
                    return Err(TessError::Duplicate(w[0].min(w[1]) as usize, w[0].max(w[1]) as usize));
                }
            }
            let pairs: Vec<(u32, u32)> = order.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();
            net.set_edges(pairs);
            net.collinear = true;
            net.hull.iter_mut().for_each(|h| *h = true);
            Ok(net)
        }
    }
}

impl EmbeddedNetwork {
    fn install(&mut self, tri: Triangulation) {
        let pts = &self.marks;
        let n = pts.len();
        self.disks = tri
            .tris
            .iter()
            .map(|t| {
                crate::geometry::euclidean_circumdisk(pts[t[0] as usize], pts[t[1] as usize], pts[t[2] as usize])
                    .expect("Delaunay triangles are nondegenerate")
            })
            .collect();
        self.vertex_tri = vec![NONE; n];
        self.hull = vec![false; n];
        let mut pairs = Vec::with_capacity(3 * n);
        for (ti, (t, adj)) in tri.tris.iter().zip(&tri.adj).enumerate() {
            for i in 0..3 {
                self.vertex_tri[t[i] as usize] = ti as u32;
                let a = t[(i + 1) % 3];
                let b = t[(i + 2) % 3];
                let u = adj[i];
                if u == NONE {
                    self.hull[a as usize] = true;
                    self.hull[b as usize] = true;
                }
                // each interior edge once, from the triangle with the smaller index
                if u != NONE && (u as usize) < ti {
                    continue;
                }
                if self.space.is_hyperbolic() {
                    let left = pts[t[i] as usize];
                    let right = (u != NONE).then(|| {
                        let ut = tri.tris[u as usize];
                        let apex = ut.iter().copied().find(|&w| w != a && w != b).unwrap();
                        pts[apex as usize]
                    });
                    if !hyperbolic_witness_exists(pts[a as usize], pts[b as usize], Some(left), right) {
                        continue;
                    }
                }
                pairs.push((a.min(b), a.max(b)));
            }
        }
        self.tri = tri;
        self.set_edges(pairs);
        self.recertify();
    }
}

/// Whether an empty disk through `a` and `b` lies strictly inside the unit
/// disk. `left` and `right` are the Delaunay apexes on either side of the
/// directed edge `a -> b` (absent on the hull); the disks through `a, b` that
/// are empty form the segment of the pencil between the two circumdisks.
pub(crate) fn hyperbolic_witness_exists(a: Point, b: Point, left: Option<Point>, right: Option<Point>) -> bool {
    let m = a.add(b).scale(0.5);
    let ab = b.sub(a);
    let len = ab.norm();
    let h = 0.5 * len;
    let nrm = Point::new(-ab.y / len, ab.x / len);
    // center m + s n, radius sqrt(h^2 + s^2)
    let param = |c: Point| {
        let cm = c.sub(m);
        (cm.norm_sq() - h * h) / (2.0 * (cm.x * nrm.x + cm.y * nrm.y))
    };
    let hi = left.map_or(f64::INFINITY, param);
    let lo = right.map_or(f64::NEG_INFINITY, param);
    let limit = 1.0 - 0.5 * CHART_GUARD;
    let g = |s: f64| m.add(nrm.scale(s)).norm() + (h * h + s * s).sqrt();
    if hi.is_finite() && g(hi) < limit || lo.is_finite() && g(lo) < limit {
        return true;
    }
    let reach = (1.0 - h * h).max(0.0).sqrt();
    let (mut x0, mut x1) = (lo.max(-reach), hi.min(reach));
    if !(x0 <= x1) {
        return false;
    }
    // g is convex: golden-section search for its minimum on [x0, x1]
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut y0 = x1 - phi * (x1 - x0);
    let mut y1 = x0 + phi * (x1 - x0);
    let (mut g0, mut g1) = (g(y0), g(y1));
    for _ in 0..200 {
        if g0.min(g1) < limit {
            return true;
        }
        if x1 - x0 <= 1e-15 * (1.0 + x0.abs()) {
            break;
        }
        if g0 < g1 {
            x1 = y1;
            y1 = y0;
            g1 = g0;
            y0 = x1 - phi * (x1 - x0);
            g0 = g(y0);
        } else {
            x0 = y0;
            y0 = y1;
            g0 = g1;
            y1 = x0 + phi * (x1 - x0);
            g1 = g(y1);
        }
    }
    g0.min(g1) < limit
}

/// Voronoi cell of one nucleus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoronoiCell {
    pub nucleus: u32,
    /// Counterclockwise cell vertices; empty when the cell is unbounded.
    pub polygon: GeodesicPolygon,
    /// Present exactly when the cell is bounded.
    pub area: Option<f64>,
    pub certified: bool,
    pub bounded: bool,
}

impl VoronoiCell {
    fn unbounded(space: SpaceKind, nucleus: u32) -> Self {
        VoronoiCell {
            nucleus,
            polygon: GeodesicPolygon::new(space, Vec::new()),
            area: None,
            certified: false,
            bounded: false,
        }
    }

    /// Largest distance from the nucleus mark to a cell vertex.
    pub fn radius(&self, nucleus_mark: Point) -> f64 {
        if !self.bounded {
            return f64::INFINITY;
        }
        let space = self.polygon.space;
        self.polygon.vertices.iter().map(|&q| space.dist_unchecked(nucleus_mark, q)).fold(0.0, f64::max)
    }
}

/// Cell of nucleus `v` built from the circumcenters of its Delaunay fan.
pub fn voronoi_cell(net: &EmbeddedNetwork, v: u32) -> VoronoiCell {
    let space = net.space;
    let t0 = net.vertex_tri[v as usize];
    if net.collinear || t0 == NONE || net.hull[v as usize] {
        return VoronoiCell::unbounded(space, v);
    }
    let mut verts: Vec<Point> = Vec::with_capacity(8);
    let mut t = t0;
    loop {
        let (c, rho) = net.disks[t as usize];
        let center = match space {
            SpaceKind::EuclideanPlane => c,
            SpaceKind::HyperbolicPoincareDisk => match hyperbolic_disk_from_chart(c, rho) {
                Ok((center, _)) => center,
                Err(_) => return VoronoiCell::unbounded(space, v),
            },
        };
        if verts.last().is_none_or(|&last| last.sub(center).norm() > COINCIDENCE_TOL) {
            verts.push(center);
        }
        let tri = net.tri.tris[t as usize];
        let i = tri.iter().position(|&w| w == v).expect("fan triangle contains its vertex");
        t = net.tri.adj[t as usize][(i + 1) % 3];
        if t == t0 {
            break;
        }
        debug_assert_ne!(t, NONE);
    }
    while verts.len() > 1 && verts[0].sub(*verts.last().unwrap()).norm() <= COINCIDENCE_TOL {
        verts.pop();
    }
    let area = space.polygon_area_unchecked(&verts);
    VoronoiCell {
        nucleus: v,
        polygon: GeodesicPolygon::new(space, verts),
        area: Some(area),
        certified: net.certified[v as usize],
        bounded: true,
    }
}

/// Cells of every vertex, indexed by vertex id.
pub fn voronoi_cells(net: &EmbeddedNetwork) -> Vec<VoronoiCell> {
    (0..net.vertex_count() as u32).map(|v| voronoi_cell(net, v)).collect()
}

/// Recomputes vertex certification from the witness disks and syncs cell
/// flags: a cell is certified iff bounded with a certified nucleus.
pub fn certify(net: &mut EmbeddedNetwork, cells: &mut [VoronoiCell]) {
    net.recertify();
    for cell in cells {
        cell.certified = cell.bounded && net.certified[cell.nucleus as usize];
    }
}

/// Mean of `deg^k` over certified vertices.
pub fn degree_moment(net: &EmbeddedNetwork, k: u32) -> Result<f64, TessError> {
    let (count, sum) =
        net.certified_ids().fold((0usize, 0.0), |(c, s), v| (c + 1, s + (net.degree(v) as f64).powi(k as i32)));
    if count == 0 {
        return Err(TessError::EmptyCertified);
    }
    Ok(sum / count as f64)
}

/// Mean of `area^k` over certified cells.
pub fn cell_volume_moment(cells: &[VoronoiCell], k: u32) -> Result<f64, TessError> {
    let (count, sum) = cells
        .iter()
        .filter(|c| c.certified)
        .filter_map(|c| c.area)
        .fold((0usize, 0.0), |(c, s), a| (c + 1, s + a.powi(k as i32)));
    if count == 0 {
        return Err(TessError::EmptyCertified);
    }
    Ok(sum / count as f64)
}

/// Buffer kept between the certified core and the window edge by
/// statistics: twice the radius of a ball holding 12 points in expectation.
pub fn core_buffer(space: SpaceKind, lambda: f64) -> f64 {
    2.0 * space.inverse_ball_volume(12.0 / lambda).unwrap_or(0.0)
}
