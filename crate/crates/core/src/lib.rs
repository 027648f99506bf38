//! Matrix Lie maps for polynomial ODEs.
//!
//! Build a truncated polynomial one-step propagator from the equations
//! ([`liemap`]), iterate it in place of a step-by-step integrator, fit its
//! weights from trajectory data ([`fit`]), and run the Van der Pol
//! ([`odebench`]) and Burgers ([`burgers`]) benchmarks.

pub mod burgers;
pub mod error;
pub mod fit;
pub mod liemap;
pub mod odebench;
pub mod par;
pub mod polybasis;
pub mod trajectory;

pub use error::{Error, Result};
pub use liemap::{build_map, Backend, BuildOptions, PolynomialMap, PolynomialSystem};
pub use par::Exec;
pub use trajectory::TrajectoryDataset;
