//! Coarse-grained space-time analysis of the graphical dynamics.
//!
//! A space-time site `x = (x^s, x^t)` is good when, driven only by the
//! clock rings in `E_{2L}(x^s) × [x^t, x^t + 3K/2]` (backward time), the
//! free/all-closed and wired/all-open chains agree on `E_{⌊3L/2⌋}(x^s)` during
//! the last `K` units of the window, and the agreed configuration has the
//! cluster geometry required by the mode. Bad sites grow into information
//! clusters; good shells around them are decoupling surfaces.

mod classify;
mod clusters;
mod probes;
mod surface;
mod tails;

pub use classify::{classify_field, BoxClassification, BoxClassifier, ClassificationField};
pub use clusters::{bad_components, extract_clusters, layer_zero_clusters, InformationCluster};
pub use probes::{h1_exact, h1_probe, h2_probe, H1Estimate, H1_EXACT_EDGES};
pub use surface::{
    core_trajectories, find_surface, locality_check, locality_horizon, verify_decoupling_surface,
    DecouplingSurface, Perturbation, SpaceTimeRegion, SurfaceFailure,
};
pub use tails::{
    domination_estimate, multi_anchor_fit, tail_estimate, DominationEstimate, MultiAnchorFit,
    SurvivalPoint, TailFit,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which cluster-geometry condition a good box must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// A cluster crossing the box and no second large cluster.
    Open,
    /// No large cluster.
    Close,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Open => "open",
            Mode::Close => "close",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Mode::Open),
            "close" => Ok(Mode::Close),
            _ => Err(Error::InvalidArgument(format!("mode must be open or close, got {s}"))),
        }
    }
}

/// Which condition rejected a bad box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Witness {
    None,
    Coalescence,
    ClusterGeometry,
}

/// Scale and window parameters of the coarse graining.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoarseConfig {
    /// `L ≥ 1`.
    pub scale: usize,
    /// `K = α L`.
    pub alpha: f64,
    /// Number of materialised time layers.
    pub layers: usize,
    pub mode: Mode,
    /// Large clusters have L∞ diameter at least `max(1, ⌈L / divisor⌉)`.
    pub diameter_divisor: f64,
}

impl CoarseConfig {
    pub fn new(scale: usize, alpha: f64, layers: usize, mode: Mode) -> Self {
        Self {
            scale,
            alpha,
            layers,
            mode,
            diameter_divisor: 100.0,
        }
    }

    pub fn with_divisor(mut self, divisor: f64) -> Self {
        self.diameter_divisor = divisor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale == 0 {
            return Err(Error::InvalidArgument("coarse scale must be at least 1".into()));
        }
        if !(self.alpha > 0.0) || !(self.diameter_divisor > 0.0) || self.layers == 0 {
            return Err(Error::InvalidArgument(
                "alpha, divisor and layer count must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn time_block(&self) -> f64 {
        self.alpha * self.scale as f64
    }

    pub fn threshold(&self) -> usize {
        ((self.scale as f64 / self.diameter_divisor).ceil() as usize).max(1)
    }

    /// Radius of the inner block, `⌊3L/2⌋`.
    pub fn inner_radius(&self) -> usize {
        3 * self.scale / 2
    }

    /// Backward time the schedule must cover to classify every layer.
    pub fn depth(&self) -> f64 {
        let k = self.time_block();
        self.layers as f64 * k + k / 2.0
    }
}
