//! Poisson–Voronoi and Delaunay tessellations of the Euclidean plane and the
//! hyperbolic plane (Poincaré disk, curvature −1), with estimators for
//! random-walk speed, coarsening percolation and related amenability
//! statistics.

pub mod amen;
pub mod geometry;
pub mod pointproc;
pub mod poly;
pub mod rng;
pub mod stats;
pub mod tess;
pub mod walk;
