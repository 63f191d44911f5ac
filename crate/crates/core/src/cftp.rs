//! Coupling from the past with the monotone sandwich.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::glauber::{Dynamics, ScheduleSource, UpdateSchedule};
use crate::lattice::TorusGeometry;
use crate::{BoundaryCondition, EdgeConfiguration, Error, ModelParams, Region, Result};

/// Horizon policy: `t ∈ {t0, 2 t0, 4 t0, …}` up to `cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingPolicy {
    pub initial: f64,
    pub cap: f64,
}

impl DoublingPolicy {
    /// `t0 = |Λ|`, cap `2^20 t0`.
    pub fn for_region(region: &Region) -> Self {
        let initial = (region.len() as f64).max(1.0);
        Self {
            initial,
            cap: initial * f64::from(1u32 << 20),
        }
    }
}

/// Outcome of one CFTP run. `sample` is present exactly when the chains
/// coalesced on the target window.
#[derive(Debug, Clone, PartialEq)]
pub struct CftpResult {
    pub sample: Option<EdgeConfiguration>,
    pub horizon: f64,
    pub coalesced: bool,
    pub checksum: u64,
}

/// Chains from all-closed and all-open on `Λ` driven by one schedule,
/// read on `Δ ⊆ Λ`.
#[derive(Debug, Clone)]
pub struct Sampler {
    dynamics: Dynamics,
    low_boundary: usize,
    high_boundary: usize,
    target: Arc<Region>,
    target_locals: Vec<usize>,
}

impl Sampler {
    /// Sampler for `φ^η_Λ` restricted to `Δ`: both chains use `η`.
    pub fn new(
        volume: Arc<Region>,
        target: Arc<Region>,
        params: ModelParams,
        bc: BoundaryCondition,
    ) -> Result<Self> {
        let dynamics = Dynamics::new(volume.clone(), params, &[bc])?;
        Self::build(dynamics, 0, 0, target)
    }

    /// Low chain with free boundary, high chain with wired boundary. The
    /// chains agree on `Δ` only once the boundary no longer matters there.
    pub fn boundary_sandwich(volume: Arc<Region>, target: Arc<Region>, params: ModelParams) -> Result<Self> {
        let dynamics = Dynamics::sandwich(volume, params)?;
        Self::build(dynamics, 0, 1, target)
    }

    fn build(dynamics: Dynamics, low_boundary: usize, high_boundary: usize, target: Arc<Region>) -> Result<Self> {
        let volume = dynamics.region().clone();
        if !target.is_subset_of(&volume) {
            return Err(Error::InvalidArgument(
                "target window must lie inside the volume".into(),
            ));
        }
        let target_locals = target
            .edges()
            .iter()
            .map(|&e| volume.local_index(e).unwrap())
            .collect();
        Ok(Self {
            dynamics,
            low_boundary,
            high_boundary,
            target,
            target_locals,
        })
    }

    pub fn volume(&self) -> &Arc<Region> {
        self.dynamics.region()
    }

    pub fn target(&self) -> &Arc<Region> {
        &self.target
    }

    /// Run the sandwich over the whole schedule; `Some(sample on Δ)` if the
    /// chains agree there at time 0.
    pub fn run(&self, sched: &UpdateSchedule) -> Option<EdgeConfiguration> {
        let mut low = self.dynamics.start_constant(false, self.low_boundary);
        let mut high = self.dynamics.start_constant(true, self.high_boundary);
        for ev in sched.events() {
            low.apply(ev);
            high.apply(ev);
        }
        debug_assert!(low.below(&high));
        if !low.agrees_on(&high, &self.target_locals) {
            return None;
        }
        let mut out = EdgeConfiguration::empty(self.target.clone());
        for (j, &i) in self.target_locals.iter().enumerate() {
            out.set(j, low.get(i));
        }
        Some(out)
    }

    pub fn coalesced(&self, sched: &UpdateSchedule) -> bool {
        self.run(sched).is_some()
    }

    /// Doubling-horizon CFTP with backward-extended schedules.
    pub fn sample(&self, source: &ScheduleSource, policy: &DoublingPolicy) -> CftpResult {
        let mut t = policy.initial;
        loop {
            let sched = source.sample(self.volume().edges(), t);
            let checksum = sched.checksum();
            if let Some(sample) = self.run(&sched) {
                return CftpResult {
                    sample: Some(sample),
                    horizon: t,
                    coalesced: true,
                    checksum,
                };
            }
            if 2.0 * t > policy.cap {
                return CftpResult {
                    sample: None,
                    horizon: t,
                    coalesced: false,
                    checksum,
                };
            }
            t *= 2.0;
        }
    }
}

/// One CFTP draw of the `Δ`-marginal.
pub fn cftp_sample(
    source: &ScheduleSource,
    volume: Arc<Region>,
    target: Arc<Region>,
    params: &ModelParams,
    bc: &BoundaryCondition,
    policy: &DoublingPolicy,
) -> Result<CftpResult> {
    Ok(Sampler::new(volume, target, *params, bc.clone())?.sample(source, policy))
}

/// Equilibrium draw on the full torus: the chain from all-open at horizon
/// `t`, flagged `certified` when the all-closed chain agrees everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSample {
    pub config: EdgeConfiguration,
    pub certified: bool,
}

pub fn torus_equilibrium_sample(
    source: &ScheduleSource,
    torus: &TorusGeometry,
    params: &ModelParams,
    t: f64,
) -> Result<TorusSample> {
    let region = Arc::new(Region::full(*torus));
    let dynamics = Dynamics::sandwich(region.clone(), *params)?;
    let sched = source.sample(region.edges(), t);
    let mut low = dynamics.start_constant(false, 0);
    let mut high = dynamics.start_constant(true, 1);
    for ev in sched.events() {
        low.apply(ev);
        high.apply(ev);
    }
    let config = high.config();
    Ok(TorusSample {
        certified: low.config() == config,
        config,
    })
}
