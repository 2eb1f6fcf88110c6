//! Point dispersion in polyhedral containers.
//!
//! Places `p` points in a closed polyhedron so that the radius
//! `D = min(½·min d(c_i, c_j), min_i dist(c_i, ∂P))` is as large as possible,
//! under the Euclidean, Chebyshev or Manhattan metric.

pub mod bench;
pub mod container;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod optimize;
pub mod oracle;
pub mod params;
pub mod solver;
pub mod tabu;

pub use container::{builtin_container, PolyhedralContainer};
pub use energy::{Configuration, EnergyBreakdown, EnergyModel, Radius};
pub use error::{Error, Result};
pub use geometry::{Metric, Point3, Vec3};
