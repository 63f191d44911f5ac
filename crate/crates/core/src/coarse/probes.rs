use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Mode;
use crate::cftp::{DoublingPolicy, Sampler};
use crate::connectivity::VertexBox;
use crate::glauber::ScheduleSource;
use crate::lattice::TorusGeometry;
use crate::rc::RcSystem;
use crate::stats::{total_variation, Proportion};
use crate::{BoundaryCondition, Error, ModelParams, Region, Result};

/// Enumeration is used when `Λ_aN` has at most this many edges.
pub const H1_EXACT_EDGES: usize = 20;

/// Distance between the free and wired measures of `Λ_aN` seen on `Λ_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H1Estimate {
    pub half_side: usize,
    pub a: f64,
    /// Exact TV, or the coupled disagreement frequency (an upper bound).
    pub tv: f64,
    pub std_error: f64,
    pub exact: bool,
    pub volume_edges: usize,
}

fn outer_radius(n: usize, a: f64) -> Result<usize> {
    if !(a >= 1.0) || n == 0 {
        return Err(Error::InvalidArgument("need N >= 1 and a >= 1".into()));
    }
    Ok((a * n as f64 - 1e-9).ceil() as usize)
}

fn h1_regions(dim: usize, n: usize, a: f64) -> Result<(Arc<Region>, Arc<Region>)> {
    let outer = outer_radius(n, a)?;
    let torus = TorusGeometry::new(dim, outer + 1)?;
    let volume = Arc::new(Region::new(torus, torus.edge_window(outer))?);
    let target = Arc::new(Region::new(torus, torus.edge_window(n))?);
    Ok((volume, target))
}

/// Exact `d_TV(φ⁰_{Λ_aN}|Λ_N, φ¹_{Λ_aN}|Λ_N)` by enumeration.
pub fn h1_exact(dim: usize, n: usize, a: f64, params: &ModelParams) -> Result<f64> {
    let (volume, target) = h1_regions(dim, n, a)?;
    let free = RcSystem::new(volume.clone(), BoundaryCondition::Free)?.with_cap(H1_EXACT_EDGES);
    let wired = RcSystem::new(volume, BoundaryCondition::Wired)?.with_cap(H1_EXACT_EDGES);
    let p = free.marginal(target.edges(), params)?;
    let q = wired.marginal(target.edges(), params)?;
    Ok(total_variation(&p, &q))
}

/// Exact when `Λ_aN` is small enough, otherwise the frequency with which
/// free and wired CFTP draws driven by the same clocks differ on `Λ_N`.
pub fn h1_probe(
    dim: usize,
    n: usize,
    a: f64,
    params: &ModelParams,
    trials: usize,
    seed: u64,
) -> Result<H1Estimate> {
    let (volume, target) = h1_regions(dim, n, a)?;
    let volume_edges = volume.len();
    if volume_edges <= H1_EXACT_EDGES {
        return Ok(H1Estimate {
            half_side: n,
            a,
            tv: h1_exact(dim, n, a, params)?,
            std_error: 0.0,
            exact: true,
            volume_edges,
        });
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let free = Sampler::new(volume.clone(), target.clone(), *params, BoundaryCondition::Free)?;
    let wired = Sampler::new(volume.clone(), target, *params, BoundaryCondition::Wired)?;
    let policy = DoublingPolicy::for_region(&volume);
    let hits = (0..trials as u64)
        .into_par_iter()
        .map(|r| {
            let src = ScheduleSource::new(seed, r);
            let x = free.sample(&src, &policy);
            let y = wired.sample(&src, &policy);
            match (x.sample, y.sample) {
                (Some(x), Some(y)) => Ok(u64::from(x != y)),
                _ => Err(Error::NotCoalesced {
                    horizon: x.horizon.max(y.horizon),
                }),
            }
        })
        .sum::<Result<u64>>()?;
    let p = Proportion::new(hits, trials as u64);
    Ok(H1Estimate {
        half_side: n,
        a,
        tv: p.estimate(),
        std_error: p.std_error(),
        exact: false,
        volume_edges,
    })
}

/// Frequency under `φ¹_{B_aN}` of the close event (a cluster of diameter at
/// least `threshold` in `B_N`) or of the open event (a spanning cluster
/// and no second cluster of diameter at least `threshold`).
#[allow(clippy::too_many_arguments)]
pub fn h2_probe(
    dim: usize,
    n: usize,
    a: f64,
    params: &ModelParams,
    mode: Mode,
    threshold: usize,
    trials: usize,
    seed: u64,
) -> Result<Proportion> {
    let outer = outer_radius(n, a)?;
    let torus = TorusGeometry::new(dim, outer + 1)?;
    let origin = torus.origin();
    let volume = Arc::new(Region::new(torus, torus.internal_edges(&torus.ball(origin, outer)))?);
    let inner = VertexBox::new(torus, origin, n)?;
    let target = Arc::new(Region::new(torus, inner.edges().collect())?);
    let sampler = Sampler::new(volume.clone(), target, *params, BoundaryCondition::Wired)?;
    let policy = DoublingPolicy::for_region(&volume);
    let hits = (0..trials as u64)
        .into_par_iter()
        .map(|r| {
            let res = sampler.sample(&ScheduleSource::new(seed, r), &policy);
            let omega = res.sample.ok_or(Error::NotCoalesced { horizon: res.horizon })?;
            let c = inner.clusters(|e| omega.get_edge(e).unwrap_or(false));
            let hit = match mode {
                Mode::Close => c.max_diameter() >= threshold,
                Mode::Open => c.spans && c.count_at_least(threshold) <= 1,
            };
            Ok(u64::from(hit))
        })
        .sum::<Result<u64>>()?;
    Ok(Proportion::new(hits, trials as u64))
}
