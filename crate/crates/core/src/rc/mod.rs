//! Random-cluster, Potts and Ising measures on small finite regions.
//!
//! A [`Region`] is an explicit edge set `F` inside an ambient torus. The
//! ambient torus stands in for `Z^d`: boundary conditions act through the
//! edges of the torus that are not in `F`.

pub(crate) mod config;
mod enumerate;
mod spin;

pub use config::{EdgeConfiguration, Region};
pub use enumerate::{
    rc_partition, rc_weight, ClusterSpectrum, RcSystem, DEFAULT_ENUMERATION_CAP,
};
pub use spin::{
    es_identity_check, ising_partition, ising_potts_bridge, potts_partition, BridgeReport,
    DEFAULT_SPIN_CAP,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cluster weight, inverse temperature, complex perturbation and field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub q: f64,
    pub beta: f64,
    /// Complex shift of the inverse temperature; weights use `beta + z`.
    pub z: Complex64,
    /// Magnetic field (Ising only).
    pub h: f64,
}

impl ModelParams {
    pub fn new(q: f64, beta: f64) -> Self {
        Self {
            q,
            beta,
            z: Complex64::new(0.0, 0.0),
            h: 0.0,
        }
    }

    pub fn with_z(mut self, z: Complex64) -> Self {
        self.z = z;
        self
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q >= 1.0) || !self.q.is_finite() {
            return Err(Error::InvalidArgument(format!("q = {} must be >= 1", self.q)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta = {} must be finite and >= 0",
                self.beta
            )));
        }
        Ok(())
    }

    /// `e^β − 1`.
    pub fn edge_factor(&self) -> f64 {
        self.beta.exp_m1()
    }

    /// `e^{β+z} − 1`.
    pub fn complex_edge_factor(&self) -> Complex64 {
        if self.z == Complex64::new(0.0, 0.0) {
            return Complex64::new(self.edge_factor(), 0.0);
        }
        (Complex64::new(self.beta, 0.0) + self.z).exp() - 1.0
    }

    /// `α_z = (e^{β+z} − 1)/(e^β − 1)`; undefined at `β = 0`.
    pub fn alpha(&self) -> Result<Complex64> {
        let base = self.edge_factor();
        if base == 0.0 {
            return Err(Error::InvalidArgument(
                "alpha_z is undefined at beta = 0".into(),
            ));
        }
        Ok(self.complex_edge_factor() / base)
    }

    /// Heat-bath opening probability when the endpoints are already
    /// connected: `1 − e^{−β}`.
    pub fn p_connected(&self) -> f64 {
        -(-self.beta).exp_m1()
    }

    /// Heat-bath opening probability when the endpoints are not connected:
    /// `(e^β − 1)/(e^β − 1 + q)`.
    pub fn p_disconnected(&self) -> f64 {
        let a = self.edge_factor();
        a / (a + self.q)
    }
}

/// Boundary condition `η` acting on the complement of a region.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// `η ≡ 0`.
    Free,
    /// `η ≡ 1`: every vertex touching an edge outside the region joins a
    /// single ghost component.
    Wired,
    /// Components are counted on the ambient torus itself.
    Periodic,
    /// `η` = the listed ambient edges (all outside the region) are open.
    Explicit(Vec<usize>),
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryCondition::Free => write!(f, "free"),
            BoundaryCondition::Wired => write!(f, "wired"),
            BoundaryCondition::Periodic => write!(f, "periodic"),
            BoundaryCondition::Explicit(e) => write!(f, "explicit({})", e.len()),
        }
    }
}

/// Number of connected components intersecting `V_F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClusterCount(pub usize);

/// `κ_F^η(ω)`.
pub fn cluster_count(omega: &EdgeConfiguration, bc: &BoundaryCondition) -> Result<ClusterCount> {
    let system = RcSystem::new(omega.region().clone(), bc.clone())?;
    Ok(ClusterCount(system.kappa(omega)))
}
