//! Incremental Bowyer–Watson triangulation of chart coordinates.
//!
//! The hull is closed with ghost triangles that share a single vertex at
//! infinity, so insertion outside the current hull is the same cavity
//! operation as insertion inside it. Orientation and in-circle signs come
//! from adaptive-precision predicates.

use robust::{incircle, orient2d, Coord};

use crate::geometry::Point;

pub(crate) const NONE: u32 = u32::MAX;
const INFINITE: u32 = u32::MAX;
const DEAD: u32 = u32::MAX - 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum KernelError {
    /// Fewer than three points or all points on one line.
    Collinear,
    Duplicate(u32, u32),
}

/// Finite triangles, counterclockwise, with `adj[t][i]` the triangle across
/// the edge opposite `tris[t][i]` (or [`NONE`] on the hull).
#[derive(Debug, Clone, Default)]
pub(crate) struct Triangulation {
    pub tris: Vec<[u32; 3]>,
    pub adj: Vec<[u32; 3]>,
}

#[derive(Clone, Copy)]
struct Tri {
    v: [u32; 3],
    n: [u32; 3],
}

#[inline]
fn c(p: Point) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Hilbert curve index of a point of the `2^16 x 2^16` grid.
fn hilbert_index(mut x: u32, mut y: u32) -> u64 {
    let n: u32 = 1 << 16;
    let mut d: u64 = 0;
    let mut s = n / 2;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += (s as u64) * (s as u64) * ((3 * rx) ^ ry) as u64;
        if ry == 0 {
            if rx == 1 {
                x = s - 1 - (x & (s - 1)) + (x & !(s - 1) & !s);
                x = (n - 1) - x;
                y = (n - 1) - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

fn spatial_order(pts: &[Point]) -> Vec<u32> {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let scale = 65535.0 / span;
    let mut keyed: Vec<(u64, u32)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let gx = ((p.x - x0) * scale) as u32;
            let gy = ((p.y - y0) * scale) as u32;
            (hilbert_index(gx.min(65535), gy.min(65535)), i as u32)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

struct Builder<'a> {
    pts: &'a [Point],
    tris: Vec<Tri>,
    free: Vec<u32>,
    last: u32,
    // scratch
    cavity: Vec<u32>,
    stack: Vec<u32>,
    mark: Vec<u32>,
    epoch: u32,
    boundary: Vec<(u32, u32, u32)>,
}

impl<'a> Builder<'a> {
    fn p(&self, v: u32) -> Point {
        self.pts[v as usize]
    }

    fn alloc(&mut self, t: Tri) -> u32 {
        if let Some(i) = self.free.pop() {
            self.tris[i as usize] = t;
            self.mark[i as usize] = 0;
            i
        } else {
            self.tris.push(t);
            self.mark.push(0);
            (self.tris.len() - 1) as u32
        }
    }

    /// Ghost triangles keep the infinite vertex in slot 2.
    fn in_conflict(&self, t: u32, q: Point) -> bool {
        let tri = &self.tris[t as usize];
        if tri.v[2] == INFINITE {
            let a = self.p(tri.v[0]);
            let b = self.p(tri.v[1]);
            let o = orient2d(c(a), c(b), c(q));
            if o > 0.0 {
                return true;
            }
            if o < 0.0 {
                return false;
            }
            // on the hull line: only the open segment counts
            let dot = (q.x - a.x) * (b.x - a.x) + (q.y - a.y) * (b.y - a.y);
            dot > 0.0 && dot < (b.x - a.x).powi(2) + (b.y - a.y).powi(2)
        } else {
            let [a, b, d] = tri.v;
            incircle(c(self.p(a)), c(self.p(b)), c(self.p(d)), c(q)) > 0.0
        }
    }

    /// Visibility walk from the most recent triangle.
    fn locate(&self, q: Point, salt: u32) -> u32 {
        let mut t = self.last;
        let mut steps = 0u32;
        'walk: loop {
            let tri = &self.tris[t as usize];
            if tri.v[2] == INFINITE {
                return t;
            }
            steps += 1;
            let start = ((salt.wrapping_add(steps)) % 3) as usize;
            for k in 0..3 {
                let i = (start + k) % 3;
                let a = self.p(tri.v[(i + 1) % 3]);
                let b = self.p(tri.v[(i + 2) % 3]);
                if orient2d(c(a), c(b), c(q)) < 0.0 {
                    t = tri.n[i];
                    continue 'walk;
                }
            }
            return t;
        }
    }

    fn insert(&mut self, v: u32, salt: u32) -> Result<(), KernelError> {
        let q = self.p(v);
        let start = self.locate(q, salt);
        {
            let tri = &self.tris[start as usize];
            for &w in &tri.v {
                if w != INFINITE && self.p(w) == q {
                    return Err(KernelError::Duplicate(w, v));
                }
            }
        }
        let mut start = start;
        if !self.in_conflict(start, q) {
            // a point on a hull edge seen from a finite triangle whose
            // circumcircle passes through it; search neighbours
            let tri = self.tris[start as usize];
            match tri.n.iter().copied().find(|&u| self.in_conflict(u, q)) {
                Some(u) => start = u,
                None => {
                    return Err(KernelError::Duplicate(tri.v[0], v));
                }
            }
        }

        self.epoch += 1;
        let epoch = self.epoch;
        self.cavity.clear();
        self.boundary.clear();
        self.stack.clear();
        self.stack.push(start);
        self.mark[start as usize] = epoch;
        while let Some(t) = self.stack.pop() {
            self.cavity.push(t);
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let u = tri.n[i];
                if self.mark[u as usize] == epoch {
                    continue;
                }
                if self.in_conflict(u, q) {
                    self.mark[u as usize] = epoch;
                    self.stack.push(u);
                } else {
                    self.boundary.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], u));
                }
            }
        }

        // new triangles (a, b, v), then fan linking around v
        let boundary = std::mem::take(&mut self.boundary);
        for &t in &self.cavity {
            self.tris[t as usize].v = [DEAD; 3];
            self.free.push(t);
        }
        let mut created: Vec<(u32, u32, u32)> = Vec::with_capacity(boundary.len());
        for &(a, b, outside) in &boundary {
            let tri = if a == INFINITE {
                Tri { v: [b, v, INFINITE], n: [NONE, outside, NONE] }
            } else if b == INFINITE {
                Tri { v: [v, a, INFINITE], n: [outside, NONE, NONE] }
            } else {
                Tri { v: [a, b, v], n: [NONE, NONE, outside] }
            };
            let id = self.alloc(tri);
            // back-pointer from the outside triangle
            let out = &mut self.tris[outside as usize];
            for i in 0..3 {
                let x = out.v[(i + 1) % 3];
                let y = out.v[(i + 2) % 3];
                if x == b && y == a {
                    out.n[i] = id;
                }
            }
            created.push((a, b, id));
        }
        // triangle (a, b, v): its edge (b, v) meets the triangle starting at b,
        // its edge (v, a) meets the triangle ending at a.
        for &(a, b, id) in &created {
            let next = created.iter().find(|e| e.0 == b).map(|e| e.2).unwrap_or(NONE);
            let prev = created.iter().find(|e| e.1 == a).map(|e| e.2).unwrap_or(NONE);
            let tri = &mut self.tris[id as usize];
            for i in 0..3 {
                let x = tri.v[(i + 1) % 3];
                let y = tri.v[(i + 2) % 3];
                if x == b && y == v || (b == INFINITE && x == INFINITE && y == v) {
                    tri.n[i] = next;
                } else if x == v && y == a || (a == INFINITE && x == v && y == INFINITE) {
                    tri.n[i] = prev;
                }
            }
            debug_assert!(tri.n.iter().all(|&n| n != NONE));
        }
        self.boundary = boundary;
        self.last =
            created.iter().map(|e| e.2).find(|&t| self.tris[t as usize].v[2] != INFINITE).unwrap_or(created[0].2);
        Ok(())
    }
}

/// Delaunay triangulation of `pts` (indices refer to `pts`).
pub(crate) fn triangulate(pts: &[Point]) -> Result<Triangulation, KernelError> {
    if pts.len() < 3 {
        return Err(KernelError::Collinear);
    }
    let order = spatial_order(pts);
    let a = order[0];
    let b = match order[1..].iter().copied().find(|&j| pts[j as usize] != pts[a as usize]) {
        Some(b) => b,
        None => return Err(KernelError::Duplicate(a, order[1])),
    };
    let third =
        order.iter().copied().find(|&j| orient2d(c(pts[a as usize]), c(pts[b as usize]), c(pts[j as usize])) != 0.0);
    let Some(cc) = third else { return Err(KernelError::Collinear) };
    let (a, b) =
        if orient2d(c(pts[a as usize]), c(pts[b as usize]), c(pts[cc as usize])) > 0.0 { (a, b) } else { (b, a) };

    let mut builder = Builder {
        pts,
        tris: Vec::with_capacity(2 * pts.len() + 8),
        free: Vec::new(),
        last: 0,
        cavity: Vec::new(),
        stack: Vec::new(),
        mark: Vec::with_capacity(2 * pts.len() + 8),
        epoch: 0,
        boundary: Vec::new(),
    };
    // finite (a, b, cc) plus ghosts on each of its edges
    let t0 = builder.alloc(Tri { v: [a, b, cc], n: [2, 3, 1] });
    let _g_ab = builder.alloc(Tri { v: [b, a, INFINITE], n: [3, 2, t0] });
    let _g_bc = builder.alloc(Tri { v: [cc, b, INFINITE], n: [1, 3, t0] });
    let _g_ca = builder.alloc(Tri { v: [a, cc, INFINITE], n: [2, 1, t0] });
    builder.last = t0;

    let mut salt = 0u32;
    for &v in &order {
        if v == a || v == b || v == cc {
            continue;
        }
        salt = salt.wrapping_mul(1_103_515_245).wrapping_add(12_345);
        builder.insert(v, salt >> 16)?;
    }

    // compact finite triangles
    let mut remap = vec![NONE; builder.tris.len()];
    let mut tris = Vec::with_capacity(builder.tris.len());
    for (i, t) in builder.tris.iter().enumerate() {
        if t.v[0] != DEAD && t.v[2] != INFINITE {
            remap[i] = tris.len() as u32;
            tris.push(t.v);
        }
    }
    let mut adj = Vec::with_capacity(tris.len());
    for t in builder.tris.iter() {
        if t.v[0] != DEAD && t.v[2] != INFINITE {
            adj.push(t.n.map(|n| remap[n as usize]));
        }
    }
    Ok(Triangulation { tris, adj })
}

impl Triangulation {
    /// Flips cocircular edges until every such edge is the lexicographically
    /// smaller of its two possible diagonals (by vertex id pair).
    pub(crate) fn canonicalize_cocircular(&mut self, pts: &[Point]) {
        let key = |a: u32, b: u32| (a.min(b), a.max(b));
        let mut queue: Vec<u32> = (0..self.tris.len() as u32).collect();
        let mut guard = 0usize;
        while let Some(t) = queue.pop() {
            guard += 1;
            if guard > 64 * self.tris.len() + 64 {
                break;
            }
            for i in 0..3 {
                let u = self.adj[t as usize][i];
                if u == NONE {
                    continue;
                }
                let tv = self.tris[t as usize];
                let (cv, a, b) = (tv[i], tv[(i + 1) % 3], tv[(i + 2) % 3]);
                let uv = self.tris[u as usize];
                let j = (0..3).find(|&j| uv[j] != a && uv[j] != b).unwrap();
                let d = uv[j];
                let p = |v: u32| c(pts[v as usize]);
                if incircle(p(cv), p(a), p(b), p(d)) != 0.0 {
                    continue;
                }
                if key(cv, d) >= key(a, b) {
                    continue;
                }
                self.flip(t, i, u, j);
                queue.push(t);
                queue.push(u);
                break;
            }
        }
    }

    /// Flip the edge shared by `t` (opposite slot `i`) and `u` (opposite slot `j`).
    fn flip(&mut self, t: u32, i: usize, u: u32, j: usize) {
        let tv = self.tris[t as usize];
        let ta = self.adj[t as usize];
        let (cv, a, b) = (tv[i], tv[(i + 1) % 3], tv[(i + 2) % 3]);
        let n_bc = ta[(i + 1) % 3];
        let n_ca = ta[(i + 2) % 3];
        let uv = self.tris[u as usize];
        let ua = self.adj[u as usize];
        let d = uv[j];
        // u is (d, b, a) up to rotation
        let n_ad = ua[(j + 1) % 3];
        let n_db = ua[(j + 2) % 3];
        debug_assert_eq!(uv[(j + 1) % 3], b);
        self.tris[t as usize] = [cv, a, d];
        self.adj[t as usize] = [n_ad, u, n_ca];
        self.tris[u as usize] = [d, b, cv];
        self.adj[u as usize] = [n_bc, t, n_db];
        let relink = |adj: &mut Vec<[u32; 3]>, n: u32, from: u32, to: u32| {
            if n != NONE {
                for s in adj[n as usize].iter_mut() {
                    if *s == from {
                        *s = to;
                    }
                }
            }
        };
        relink(&mut self.adj, n_ad, u, t);
        relink(&mut self.adj, n_bc, t, u);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle() {
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let t = triangulate(&pts).unwrap();
        assert_eq!(t.tris.len(), 1);
        assert_eq!(t.adj[0], [NONE; 3]);
    }

    #[test]
    fn collinear_and_duplicate() {
        let line: Vec<Point> = (0..5).map(|i| Point::new(i as f64, 2.0 * i as f64)).collect();
        assert_eq!(triangulate(&line).unwrap_err(), KernelError::Collinear);
        let dup = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        assert!(matches!(triangulate(&dup), Err(KernelError::Duplicate(..))));
    }

    #[test]
    fn grid_triangulation_is_consistent() {
        let mut pts = Vec::new();
        for i in 0..7 {
            for j in 0..6 {
                pts.push(Point::new(i as f64, j as f64));
            }
        }
        let mut t = triangulate(&pts).unwrap();
        t.canonicalize_cocircular(&pts);
        // 42 points, 22 on the hull: 2n - h - 2 triangles
        assert_eq!(t.tris.len(), 2 * 42 - 22 - 2);
        for (ti, adj) in t.adj.iter().enumerate() {
            for &u in adj {
                if u != NONE {
                    assert!(t.adj[u as usize].contains(&(ti as u32)));
                }
            }
        }
    }
}
