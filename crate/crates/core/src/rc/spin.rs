use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enumerate::RcSystem;
use crate::lattice::TorusGeometry;
use crate::{BoundaryCondition, Error, ModelParams, Region, Result};

/// Cap on the number of spin configurations visited.
pub const DEFAULT_SPIN_CAP: u64 = 1 << 24;

/// Interaction structure of a vertex set: internal edges, plus edges to a
/// fixed exterior spin for `Wired`.
struct SpinSystem {
    n: usize,
    internal: Vec<(usize, usize)>,
    boundary: Vec<usize>,
}

impl SpinSystem {
    fn new(torus: &TorusGeometry, vertices: &[usize], bc: &BoundaryCondition) -> Result<Self> {
        let mut vs = vertices.to_vec();
        vs.sort_unstable();
        vs.dedup();
        if vs.is_empty() {
            return Err(Error::InvalidArgument("vertex set is empty".into()));
        }
        if vs.last().is_some_and(|&v| v >= torus.vertex_count()) {
            return Err(Error::InvalidArgument("vertex outside the torus".into()));
        }
        let local = |v: usize| vs.binary_search(&v).ok();
        let internal = torus
            .internal_edges(&vs)
            .into_iter()
            .map(|e| {
                let (a, b) = torus.endpoints(e);
                (local(a).unwrap(), local(b).unwrap())
            })
            .collect();
        let boundary = match bc {
            BoundaryCondition::Free | BoundaryCondition::Periodic => Vec::new(),
            BoundaryCondition::Wired => torus
                .touching_edges(&vs)
                .into_iter()
                .filter_map(|e| {
                    let (a, b) = torus.endpoints(e);
                    match (local(a), local(b)) {
                        (Some(i), None) | (None, Some(i)) => Some(i),
                        _ => None,
                    }
                })
                .collect(),
            BoundaryCondition::Explicit(_) => {
                return Err(Error::InvalidBoundary(
                    "spin models take free, wired or periodic boundary conditions".into(),
                ))
            }
        };
        Ok(Self {
            n: vs.len(),
            internal,
            boundary,
        })
    }

    fn interaction_edges(&self) -> usize {
        self.internal.len() + self.boundary.len()
    }

    fn check(&self, states: u64) -> Result<u64> {
        let total = (self.n as u32)
            .checked_mul(64 - states.leading_zeros())
            .filter(|&bits| bits < 63)
            .map(|_| states.pow(self.n as u32))
            .filter(|&t| t <= DEFAULT_SPIN_CAP);
        total.ok_or(Error::CapExceeded {
            what: "spin enumeration",
            needed: self.n,
            cap: DEFAULT_SPIN_CAP as usize,
        })
    }

    /// `Σ_σ exp(β Σ δ(σ_i, σ_j))`, exterior colour 0 for wired edges.
    fn potts(&self, q: u64, beta: f64) -> Result<f64> {
        let total = self.check(q)?;
        let n = self.n;
        let chunk = 1u64 << 12;
        let parts: Vec<f64> = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut spins = vec![0u64; n];
                let mut acc = 0.0;
                for idx in c * chunk..((c + 1) * chunk).min(total) {
                    let mut r = idx;
                    for s in spins.iter_mut() {
                        *s = r % q;
                        r /= q;
                    }
                    let agree = self
                        .internal
                        .iter()
                        .filter(|&&(a, b)| spins[a] == spins[b])
                        .count()
                        + self.boundary.iter().filter(|&&i| spins[i] == 0).count();
                    acc += (beta * agree as f64).exp();
                }
                acc
            })
            .collect();
        Ok(parts.into_iter().sum())
    }

    /// `Σ_σ exp(β Σ σ_i σ_j + h Σ σ_i)`, exterior spin `+1` for wired edges.
    fn ising(&self, beta: f64, h: f64) -> Result<f64> {
        let total = self.check(2)?;
        let chunk = 1u64 << 12;
        let parts: Vec<f64> = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut acc = 0.0;
                for mask in c * chunk..((c + 1) * chunk).min(total) {
                    let spin = |i: usize| if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                    let pair: f64 = self.internal.iter().map(|&(a, b)| spin(a) * spin(b)).sum();
                    let ext: f64 = self.boundary.iter().map(|&i| spin(i)).sum();
                    let mag: f64 = (0..self.n).map(spin).sum();
                    acc += (beta * (pair + ext) + h * mag).exp();
                }
                acc
            })
            .collect();
        Ok(parts.into_iter().sum())
    }
}

fn integer_q(q: f64) -> Result<u64> {
    if q.fract() != 0.0 || q < 1.0 || !q.is_finite() {
        return Err(Error::NonIntegerQ(q));
    }
    Ok(q as u64)
}

/// Potts partition function on a vertex set of the torus. Interactions are
/// the torus edges with both endpoints in the set; `Wired` adds one term per
/// edge leaving the set with the exterior spin fixed to colour 0.
pub fn potts_partition(
    torus: &TorusGeometry,
    vertices: &[usize],
    params: &ModelParams,
    bc: &BoundaryCondition,
) -> Result<f64> {
    let q = integer_q(params.q)?;
    SpinSystem::new(torus, vertices, bc)?.potts(q, params.beta)
}

/// Ising partition function with field `params.h`; `Wired` fixes the
/// exterior spin to `+1`.
pub fn ising_partition(
    torus: &TorusGeometry,
    vertices: &[usize],
    params: &ModelParams,
    bc: &BoundaryCondition,
) -> Result<f64> {
    SpinSystem::new(torus, vertices, bc)?.ising(params.beta, params.h)
}

/// `|Z_RC,per − Z_Potts,per| / |Z_Potts,per|` on the full torus.
pub fn es_identity_check(torus: &TorusGeometry, params: &ModelParams) -> Result<f64> {
    let region = Arc::new(Region::full(*torus));
    let rc = RcSystem::new(region, BoundaryCondition::Periodic)?.partition(params)?;
    let all: Vec<usize> = (0..torus.vertex_count()).collect();
    let potts = potts_partition(torus, &all, params, &BoundaryCondition::Periodic)?;
    Ok((rc.re - potts).abs().max(rc.im.abs()) / potts.abs())
}

/// Brute-force comparison of Ising at `β` against two-state Potts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub interaction_edges: usize,
    pub ising: f64,
    /// `e^{−β m} Z_Potts(2β, 2)` with `m` interaction edges.
    pub potts_double_beta: f64,
    /// `e^{−β m} Z_Potts(β, 2)`.
    pub potts_same_beta: f64,
    pub double_beta_discrepancy: f64,
    pub same_beta_discrepancy: f64,
}

/// Evaluate both candidate Ising–Potts relations on one vertex set.
pub fn ising_potts_bridge(
    torus: &TorusGeometry,
    vertices: &[usize],
    beta: f64,
    bc: &BoundaryCondition,
) -> Result<BridgeReport> {
    let sys = SpinSystem::new(torus, vertices, bc)?;
    let m = sys.interaction_edges();
    let ising = sys.ising(beta, 0.0)?;
    let pre = (-beta * m as f64).exp();
    let potts_double_beta = pre * sys.potts(2, 2.0 * beta)?;
    let potts_same_beta = pre * sys.potts(2, beta)?;
    Ok(BridgeReport {
        interaction_edges: m,
        ising,
        potts_double_beta,
        potts_same_beta,
        double_beta_discrepancy: (ising - potts_double_beta).abs() / ising,
        same_beta_discrepancy: (ising - potts_same_beta).abs() / ising,
    })
}
