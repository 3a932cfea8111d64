//! Amenability experiments on Poisson–Delaunay networks.
//!
//! Invariant amenability is an infimum over all finitary unimodular
//! percolations. That class cannot be searched, so the experiments use one
//! explicit family, the δ-Poisson coarsening: an edge is open iff its
//! endpoints share a Voronoi cell of an independent Poisson process of
//! intensity δ. Its root-cluster boundary ratio is reported as a curve in δ.
//!
//! Alongside it: the nearest-point laws `d1`, `d2 - d1` that control the
//! coarsening, Følner quotients of cell unions, mass-transport checks and a
//! spectral upper bound on the edge-isoperimetric constant.

pub mod folner;
pub mod isoperimetry;
pub mod laws;
pub mod lazy;
pub mod mtp;
pub mod percolation;

use crate::geometry::GeometryError;
use crate::pointproc::SampleError;
use crate::tess::TessError;

pub use folner::{folner_quotient, unit_translations, FolnerReport, QuotientEstimate};
pub use isoperimetry::{isoperimetric_upper_bound, IsoperimetricReport};
pub use laws::{
    d1_d2_replica, d1_d2_report, d1_d2_statistics, d1_tail, d2_window, gap_envelope, gap_tail_exact, D1D2Replica,
    D1D2Report, TailRow,
};
pub use lazy::{palm_root_cluster, LazyRootCluster};
pub use mtp::{mtp_check, mtp_core_radius, mtp_sample, transport_double_sums, MtpReport, MtpSample, Transport};
pub use percolation::{
    boundary_ratio_estimate, closed_degree, closed_degree_sum, clusters, coarse_window, coarsen_percolation,
    root_boundary_ratio, root_cluster, BoundaryRatioReport, Cluster, PercolationLabeling,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AmenError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("coarse window {coarse} does not extend the base window {base} under the chart cap")]
    CoarseWindow { base: f64, coarse: f64 },
    #[error("sampling window of radius {needed} exceeds the chart cap")]
    UndersizedWindow { needed: f64 },
    #[error("labeling does not belong to this network")]
    Mismatch,
    #[error("vertex {0} does not exist")]
    UnknownVertex(u32),
    #[error("all {0} replicas were discarded")]
    AllDiscarded(usize),
    #[error("the set is empty")]
    EmptySet,
    #[error("cell of nucleus {0} is unbounded")]
    UnboundedCell(u32),
    #[error("unknown transport {0:?}; expected one of adjacency, f1, f2, f3")]
    UnknownTransport(String),
    #[error("certified core is empty")]
    EmptyCore,
    #[error("power iteration did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error(transparent)]
    Tess(#[from] TessError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
