//! Exact and Monte Carlo machinery for the random-cluster model.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: torus, coarse lattice, space-time lattice and polymers.
//! * [`rc`]: random-cluster / Potts / Ising weights and exact partition
//!   functions by enumeration.
//! * [`connectivity`]: same-component and cluster-geometry queries over a
//!   mutable edge configuration.
//! * [`glauber`]: graphical representation of heat-bath Glauber dynamics.
//! * [`cftp`]: coupling from the past on top of the monotone sandwich.
//! * [`coarse`]: good/bad space-time boxes, information clusters,
//!   decoupling surfaces and tail statistics.
//! * [`polymer`]: abstract polymer models, Ursell functions, the cluster
//!   expansion and its convergence criterion, weight estimation and the
//!   pressure / correlation pipelines.
//! * [`stats`]: proportions, jackknife and bootstrap helpers.
//! * [`io`]: CSV and JSON encodings shared by the CLI.

pub mod cftp;
pub mod coarse;
pub mod connectivity;
mod error;
pub mod glauber;
pub mod io;
pub mod lattice;
pub mod polymer;
pub mod rc;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use lattice::{CoarseLattice, Polymer, SpaceTimeLattice, TorusGeometry};
pub use rc::{BoundaryCondition, EdgeConfiguration, ModelParams, Region};
