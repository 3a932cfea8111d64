//! Mass-transport checks: the mean mass a vertex sends equals the mean mass
//! it receives, for transports from a fixed registry.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::SpaceKind;
use crate::stats::mean_ci;
use crate::tess::{core_buffer, EmbeddedNetwork};

use super::AmenError;

/// Local transport functions `f(G, x, y)`; each is supported on neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transport {
    /// `1[x ~ y]`.
    Adjacency,
    /// `1[x ~ y, deg x > deg y]`.
    F1,
    /// `1[y is the nearest point to x]`.
    F2,
    /// `d(x, y) 1[x ~ y] / deg x`.
    F3,
}

impl Transport {
    pub const ALL: [Transport; 4] = [Transport::Adjacency, Transport::F1, Transport::F2, Transport::F3];

    pub fn name(self) -> &'static str {
        match self {
            Transport::Adjacency => "adjacency",
            Transport::F1 => "f1",
            Transport::F2 => "f2",
            Transport::F3 => "f3",
        }
    }

    /// `f(G, x, y)` for `y` a neighbour of `x`; zero off the edge set.
    fn mass(self, net: &EmbeddedNetwork, x: u32, y: u32) -> f64 {
        match self {
            Transport::Adjacency => 1.0,
            Transport::F1 => f64::from(u8::from(net.degree(x) > net.degree(y))),
            Transport::F2 => f64::from(u8::from(nearest_neighbor(net, x) == Some(y))),
            Transport::F3 => net.space.dist_unchecked(net.mark(x), net.mark(y)) / net.degree(x) as f64,
        }
    }
}

impl FromStr for Transport {
    type Err = AmenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Transport::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| AmenError::UnknownTransport(s.to_string()))
    }
}

/// The nearest point to `x` is a Delaunay neighbour of `x`.
fn nearest_neighbor(net: &EmbeddedNetwork, x: u32) -> Option<u32> {
    let space = net.space;
    let p = net.mark(x);
    net.neighbors(x)
        .iter()
        .copied()
        .min_by(|&a, &b| space.dist_unchecked(p, net.mark(a)).total_cmp(&space.dist_unchecked(p, net.mark(b))))
}

pub fn sent(net: &EmbeddedNetwork, t: Transport, o: u32) -> f64 {
    net.neighbors(o).iter().map(|&x| t.mass(net, o, x)).sum()
}

pub fn received(net: &EmbeddedNetwork, t: Transport, o: u32) -> f64 {
    net.neighbors(o).iter().map(|&x| t.mass(net, x, o)).sum()
}

/// Totals `(Σ_o sent(o), Σ_o received(o))` over every vertex, computed by two
/// separate passes. Equal on every finite graph.
pub fn transport_double_sums(net: &EmbeddedNetwork, t: Transport) -> (f64, f64) {
    let n = net.vertex_count() as u32;
    ((0..n).map(|o| sent(net, t, o)).sum(), (0..n).map(|o| received(net, t, o)).sum())
}

/// Core radius for transport checks in a window of radius `window`. Roots
/// need certified neighbours as well; demanding that is a selection on the
/// configuration unless it holds almost surely, so the core keeps three
/// quarters of a buffer more than degree statistics do.
pub fn mtp_core_radius(space: SpaceKind, lambda: f64, window: f64) -> f64 {
    window - 1.75 * core_buffer(space, lambda)
}

/// Window means of sent and received mass over roots whose neighbourhood is
/// window-free: the root and all its neighbours certified, and the root
/// within `core_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtpSample {
    pub sent: f64,
    pub received: f64,
    pub roots: usize,
    /// Vertices within the core radius that failed the certification filter.
    pub excluded: usize,
}

pub fn mtp_sample(net: &EmbeddedNetwork, t: Transport, core_radius: f64) -> Result<MtpSample, AmenError> {
    let in_core: Vec<u32> = (0..net.vertex_count() as u32).filter(|&v| net.origin_dist(v) <= core_radius).collect();
    let roots: Vec<u32> = in_core
        .iter()
        .copied()
        .filter(|&v| net.is_certified(v) && net.neighbors(v).iter().all(|&w| net.is_certified(w)))
        .collect();
    if roots.is_empty() {
        return Err(AmenError::EmptyCore);
    }
    let n = roots.len() as f64;
    Ok(MtpSample {
        sent: roots.iter().map(|&o| sent(net, t, o)).sum::<f64>() / n,
        received: roots.iter().map(|&o| received(net, t, o)).sum::<f64>() / n,
        roots: roots.len(),
        excluded: in_core.len() - roots.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtpReport {
    pub transport: Transport,
    pub sent: f64,
    pub sent_std_err: f64,
    pub received: f64,
    pub received_std_err: f64,
    /// Mean of the per-replica difference `sent - received`.
    pub difference: f64,
    pub difference_std_err: f64,
    pub replicas: usize,
}

impl MtpReport {
    /// `|sent - received| <= 3 sqrt(se_sent² + se_received²)`.
    pub fn agrees(&self) -> bool {
        (self.sent - self.received).abs() <= 3.0 * self.sent_std_err.hypot(self.received_std_err)
    }
}

/// Pools per-replica window means into the Palm estimates.
pub fn mtp_check(transport: Transport, samples: &[MtpSample]) -> Result<MtpReport, AmenError> {
    let s: Vec<f64> = samples.iter().map(|m| m.sent).collect();
    let r: Vec<f64> = samples.iter().map(|m| m.received).collect();
    let d: Vec<f64> = samples.iter().map(|m| m.sent - m.received).collect();
    let (s, r, d) = match (mean_ci(&s), mean_ci(&r), mean_ci(&d)) {
        (Some(s), Some(r), Some(d)) => (s, r, d),
        _ => return Err(AmenError::EmptyCore),
    };
    Ok(MtpReport {
        transport,
        sent: s.estimate,
        sent_std_err: s.std_err,
        received: r.estimate,
        received_std_err: r.std_err,
        difference: d.estimate,
        difference_std_err: d.std_err,
        replicas: samples.len(),
    })
}
