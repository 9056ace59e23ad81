//! Multi-coordinate elastic maps.
//!
//! A chain of `M` nodes is fitted to one or more demonstrations by minimizing
//! approximation energies measured in Cartesian, Tangent and Laplacian
//! coordinates together with stretching and bending penalties. Point
//! constraints (start, end, via points) are enforced exactly and all energy
//! weights are tuned automatically inside an expectation-maximization loop.
//!
//! ```
//! use mc_elmap::{dataset, em};
//!
//! let demos = dataset::synth_demos(dataset::Shape::SCurve, 3, 0.01, 7);
//! let set = dataset::DemonstrationSet::new(demos, None).unwrap();
//! let cfg = em::FitConfig { nodes: 30, max_iters: 5, ..Default::default() };
//! let start = set.demos()[0].point(0);
//! let fit = em::reproduce(&set, Some(start.clone()), None, &[], &cfg).unwrap();
//! assert!((fit.nodes.row(0) - start).norm() < 1e-9);
//! ```

pub mod autotune;
pub mod clustering;
pub mod coordinates;
pub mod dataset;
pub mod em;
mod error;
pub mod metrics;
pub mod solver;

pub use coordinates::{DifferentialMatrix, Frame, MatrixKind, Trajectory};
pub use error::{Error, Result};

/// Node chain of a map, one node per row.
pub type Nodes = nalgebra::DMatrix<f64>;
/// A single point in workspace coordinates.
pub type Point = nalgebra::RowDVector<f64>;
