//! Numerical library for cycloids of smooth symmetric normed planes.
//!
//! The unit circle of a normed plane induces a Sturm-Liouville transport on
//! the pair (support value, normalized derivative); its periodic and
//! antiperiodic spectrum classifies the closed hypocycloids and epicycloids
//! of the plane.  This crate builds the coefficient fields of a plane
//! (`plane`), integrates the transport and classifies monodromies (`sturm`),
//! locates the eigenvalue ladder and the curves that close after several
//! turns (`spectrum`), reconstructs curves, evolutes and involutes
//! (`geometry`), and numerically verifies the structural theorems
//! (orthogonal bases, involute contraction, zero-count bounds, vertex
//! counts) in `analysis`.

pub mod analysis;
pub mod geometry;
pub mod grid;
pub mod ode;
pub mod plane;
pub mod rng;
pub mod spectrum;
pub mod sturm;

pub use geometry::CurveData;
pub use grid::Grid;
pub use plane::{build_plane, validate_plane, PlaneField, PlaneModel};
pub use spectrum::{find_ladder, EigenRecord, Ladder};
pub use sturm::{Monodromy, MonodromyClass, StateVector};

/// Default grid size; every documented tolerance assumes it.
pub const DEFAULT_GRID_SIZE: usize = 2048;

/// Default eigenvalue bisection tolerance.
pub const DEFAULT_EIGEN_TOL: f64 = 1e-9;
