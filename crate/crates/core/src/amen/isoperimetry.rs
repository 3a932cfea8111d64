//! Spectral sweep upper bound on the edge-isoperimetric constant
//! `inf |∂_E V| / Vol(V)` over finite vertex sets of the certified core.

use serde::{Deserialize, Serialize};

use crate::rng::rng_from_seed;
use crate::tess::EmbeddedNetwork;

use super::AmenError;

pub const POWER_TOLERANCE: f64 = 1e-8;
pub const POWER_MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricReport {
    /// `min |∂_E S| / Vol(S)` over sweep prefixes with `Vol(S)` at most half
    /// the component volume.
    pub bound: f64,
    pub prefix_size: usize,
    /// Certified vertices with an origin distance at most the core radius.
    pub core_size: usize,
    /// Vertices of the component used.
    pub component_size: usize,
    /// The core was disconnected and its largest component was used.
    pub used_largest_component: bool,
    /// Second eigenvalue of the normalised adjacency operator.
    pub lambda2: f64,
    pub iterations: usize,
}

/// Sweep-cut bound on the certified vertices of `net` within `core_radius`.
/// Boundaries count every base-network edge leaving the prefix and volumes
/// use full degrees, so the bound holds for the infinite graph.
pub fn isoperimetric_upper_bound(net: &EmbeddedNetwork, core_radius: f64) -> Result<IsoperimetricReport, AmenError> {
    let n = net.vertex_count();
    let in_core: Vec<bool> = (0..n as u32).map(|v| net.is_certified(v) && net.origin_dist(v) <= core_radius).collect();
    let core_size = in_core.iter().filter(|&&c| c).count();
    if core_size == 0 {
        return Err(AmenError::EmptyCore);
    }
    // largest connected component of the induced core graph
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        if !in_core[s] || comp[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        comp[s] = id;
        let mut stack = vec![s as u32];
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in net.neighbors(v) {
                if in_core[w as usize] && comp[w as usize] == usize::MAX {
                    comp[w as usize] = id;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    let best = (0..sizes.len()).max_by_key(|&i| sizes[i]).unwrap();
    let members: Vec<u32> = (0..n as u32).filter(|&v| comp[v as usize] == best).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in members.iter().enumerate() {
        local[v as usize] = i;
    }
    let adj: Vec<Vec<usize>> = members
        .iter()
        .map(|&v| net.neighbors(v).iter().map(|&w| local[w as usize]).filter(|&j| j != usize::MAX).collect())
        .collect();
    let (vector, lambda2, iterations) = second_eigenvector(&adj)?;
    let deg_sub: Vec<f64> = adj.iter().map(|a| a.len() as f64).collect();
    let scores: Vec<f64> = vector.iter().zip(&deg_sub).map(|(x, d)| x / d.sqrt()).collect();
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let total: f64 = members.iter().map(|&v| net.degree(v) as f64).sum();
    let sweep = |order: &[usize]| -> (f64, usize) {
        let mut inside = vec![false; members.len()];
        let mut boundary: i64 = 0;
        let mut vol = 0.0;
        let mut best = (f64::INFINITY, 0);
        for (k, &i) in order.iter().enumerate() {
            let v = members[i];
            let deg = net.degree(v) as i64;
            let internal = adj[i].iter().filter(|&&j| inside[j]).count() as i64;
            // edges into the prefix stop being boundary, the rest become boundary
            boundary += deg - 2 * internal;
            inside[i] = true;
            vol += deg as f64;
            if vol > 0.5 * total {
                break;
            }
            let ratio = boundary as f64 / vol;
            if ratio < best.0 {
                best = (ratio, k + 1);
            }
        }
        best
    };
    let forward = sweep(&order);
    order.reverse();
    let backward = sweep(&order);
    let (bound, prefix_size) = if backward.0 < forward.0 { backward } else { forward };
    Ok(IsoperimetricReport {
        bound,
        prefix_size,
        core_size,
        component_size: members.len(),
        used_largest_component: sizes.len() > 1,
        lambda2,
        iterations,
    })
}

/// Second eigenvector of `D^{-1/2} A D^{-1/2}` by power iteration on the
/// lazy operator `(I + N) / 2` with the top eigenvector `∝ sqrt(deg)`
/// projected out.
fn second_eigenvector(adj: &[Vec<usize>]) -> Result<(Vec<f64>, f64, usize), AmenError> {
    use rand::Rng;
    let n = adj.len();
    if n < 2 {
        return Ok((vec![0.0; n], 0.0, 0));
    }
    let inv_sqrt: Vec<f64> = adj.iter().map(|a| 1.0 / (a.len() as f64).sqrt()).collect();
    let top: Vec<f64> = adj.iter().map(|a| (a.len() as f64).sqrt()).collect();
    let top_norm = top.iter().map(|x| x * x).sum::<f64>().sqrt();
    let top: Vec<f64> = top.iter().map(|x| x / top_norm).collect();
    let deflate = |x: &mut Vec<f64>| {
        let dot: f64 = x.iter().zip(&top).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(&top).for_each(|(a, b)| *a -= dot * b);
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|a| *a /= norm);
        }
    };
    let mut rng = rng_from_seed(n as u64);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    deflate(&mut x);
    let mut lazy_eig = 0.0;
    let mut y = vec![0.0; n];
    for it in 1..=POWER_MAX_ITERATIONS {
        for i in 0..n {
            let s: f64 = adj[i].iter().map(|&j| x[j] * inv_sqrt[j]).sum();
            y[i] = 0.5 * (x[i] + inv_sqrt[i] * s);
        }
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        std::mem::swap(&mut x, &mut y);
        deflate(&mut x);
        if (rayleigh - lazy_eig).abs() < POWER_TOLERANCE {
            return Ok((x, 2.0 * rayleigh - 1.0, it));
        }
        lazy_eig = rayleigh;
    }
    Err(AmenError::NoConvergence(POWER_MAX_ITERATIONS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, SpaceKind};

    fn graph(n: usize, edges: &[(u32, u32)]) -> EmbeddedNetwork {
        let marks = (0..n).map(|i| Point::polar(1.0, i as f64)).collect();
        EmbeddedNetwork::from_edges(SpaceKind::EuclideanPlane, 100.0, marks, edges, vec![true; n]).unwrap()
    }

    #[test]
    fn cycle_sweep_finds_the_two_arc_cut() {
        for n in [8usize, 12, 30] {
            let edges: Vec<(u32, u32)> = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
            let rep = isoperimetric_upper_bound(&graph(n, &edges), f64::INFINITY).unwrap();
            assert!((rep.bound - 2.0 / n as f64).abs() < 1e-12, "n={n}: {rep:?}");
        }
    }

    #[test]
    fn empty_core_is_rejected() {
        let net = EmbeddedNetwork::from_edges(
            SpaceKind::EuclideanPlane,
            10.0,
            vec![Point::ORIGIN, Point::new(1.0, 0.0)],
            &[(0, 1)],
            vec![false, false],
        )
        .unwrap();
        assert!(matches!(isoperimetric_upper_bound(&net, 5.0), Err(AmenError::EmptyCore)));
    }

    #[test]
    fn disconnected_core_uses_the_largest_component() {
        let net = graph(5, &[(0, 1), (1, 2), (2, 0), (3, 4)]);
        let rep = isoperimetric_upper_bound(&net, f64::INFINITY).unwrap();
        assert!(rep.used_largest_component);
        assert_eq!(rep.component_size, 3);
    }
}
