use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{UnionFind, Wiring};
use crate::{BoundaryCondition, EdgeConfiguration, Error, ModelParams, Region, Result};

/// Default cap on the number of edges of an enumerated region.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

const BLOCK_BITS: u32 = 12;

/// A region together with its boundary condition, ready for cluster counts
/// and exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct RcSystem {
    region: Arc<Region>,
    bc: BoundaryCondition,
    wiring: Wiring,
    cap: usize,
}

impl RcSystem {
    pub fn new(region: Arc<Region>, bc: BoundaryCondition) -> Result<Self> {
        let wiring = region.wiring(&bc)?;
        Ok(Self {
            region,
            bc,
            wiring,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    /// Override the enumeration cap (number of edges, at most 40).
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap.min(40);
        self
    }

    pub fn region(&self) -> &Arc<Region> {
        &self.region
    }

    pub fn bc(&self) -> &BoundaryCondition {
        &self.bc
    }

    pub fn wiring(&self) -> &Wiring {
        &self.wiring
    }

    fn node_count(&self) -> usize {
        self.region.vertices().len() + usize::from(self.wiring.ghost)
    }

    fn count_components(&self, uf: &mut UnionFind) -> usize {
        for &(a, b) in &self.wiring.pairs {
            uf.union(a as usize, b as usize);
        }
        let nv = self.region.vertices().len();
        let mut roots: Vec<usize> = (0..nv).map(|v| uf.find(v)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// `κ_F^η(ω)`.
    pub fn kappa(&self, omega: &EdgeConfiguration) -> usize {
        let mut uf = UnionFind::new(self.node_count());
        for (i, &(a, b)) in self.region.local_endpoints().iter().enumerate() {
            if omega.get(i) {
                uf.union(a as usize, b as usize);
            }
        }
        self.count_components(&mut uf)
    }

    fn kappa_mask(&self, mask: u64, uf: &mut UnionFind) -> usize {
        uf.reset();
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            let (a, b) = self.region.local_endpoints()[i];
            uf.union(a as usize, b as usize);
            m &= m - 1;
        }
        self.count_components(uf)
    }

    /// `(e^{β+z} − 1)^{|ω|} q^κ`.
    pub fn weight(&self, omega: &EdgeConfiguration, params: &ModelParams) -> Complex64 {
        params.complex_edge_factor().powu(omega.open_count() as u32)
            * params.q.powi(self.kappa(omega) as i32)
    }

    /// Exact `φ(ω_e = 1 | ω off e)` from the weight ratio (real `β`).
    pub fn conditional_open(&self, omega: &EdgeConfiguration, i: usize, params: &ModelParams) -> f64 {
        let mut w = omega.clone();
        w.set(i, true);
        let k1 = self.kappa(&w) as i32;
        w.set(i, false);
        let k0 = self.kappa(&w) as i32;
        let open = params.edge_factor() * params.q.powi(k1 - k0);
        open / (open + 1.0)
    }

    fn check_cap(&self) -> Result<()> {
        if self.region.len() > self.cap {
            return Err(Error::CapExceeded {
                what: "configuration enumeration",
                needed: self.region.len(),
                cap: self.cap,
            });
        }
        if self.region.is_empty() {
            return Err(Error::InvalidArgument("region is empty".into()));
        }
        Ok(())
    }

    /// Visit every configuration in Gray-code order, block-parallel, and
    /// reduce the per-block results in block order.
    fn fold_blocks<T, F>(&self, init: impl Fn() -> T + Sync, visit: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&mut T, u64, usize, usize) + Sync,
    {
        self.check_cap()?;
        let n = self.region.len() as u32;
        let total: u64 = 1 << n;
        let block: u64 = 1 << BLOCK_BITS.min(n);
        let blocks = total / block;
        let nodes = self.node_count();
        Ok((0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut acc = init();
                let mut uf = UnionFind::new(nodes);
                let start = b * block;
                let mut mask = start ^ (start >> 1);
                let mut open = mask.count_ones() as usize;
                for i in start..start + block {
                    if i > start {
                        let flip = i.trailing_zeros();
                        mask ^= 1 << flip;
                        if mask >> flip & 1 == 1 {
                            open += 1;
                        } else {
                            open -= 1;
                        }
                    }
                    let kappa = self.kappa_mask(mask, &mut uf);
                    visit(&mut acc, mask, open, kappa);
                }
                acc
            })
            .collect())
    }

    fn power_tables(&self, params: &ModelParams) -> (Vec<Complex64>, Vec<f64>) {
        let x = params.complex_edge_factor();
        let mut xs = vec![Complex64::new(1.0, 0.0); self.region.len() + 1];
        for k in 1..xs.len() {
            xs[k] = xs[k - 1] * x;
        }
        let mut qs = vec![1.0; self.region.vertices().len() + 2];
        for k in 1..qs.len() {
            qs[k] = qs[k - 1] * params.q;
        }
        (xs, qs)
    }

    /// `Z^{RC,η}_F` by direct summation of the weights.
    pub fn partition(&self, params: &ModelParams) -> Result<Complex64> {
        let (xs, qs) = self.power_tables(params);
        let parts = self.fold_blocks(
            || Complex64::new(0.0, 0.0),
            |acc, _, open, kappa| *acc += xs[open] * qs[kappa],
        )?;
        Ok(parts.into_iter().sum())
    }

    /// `(Σ w(ω) g(ω, |ω|), Σ w(ω))` in one pass.
    pub fn weighted_sums<G>(&self, params: &ModelParams, g: G) -> Result<(Complex64, Complex64)>
    where
        G: Fn(u64, usize) -> Complex64 + Sync,
    {
        let (xs, qs) = self.power_tables(params);
        let zero = Complex64::new(0.0, 0.0);
        let parts = self.fold_blocks(
            || (zero, zero),
            |acc, mask, open, kappa| {
                let w = xs[open] * qs[kappa];
                acc.0 += w * g(mask, open);
                acc.1 += w;
            },
        )?;
        Ok(parts
            .into_iter()
            .fold((zero, zero), |a, b| (a.0 + b.0, a.1 + b.1)))
    }

    /// `φ(g)` for a function of the local mask and `|ω|`.
    pub fn expectation<G>(&self, params: &ModelParams, g: G) -> Result<Complex64>
    where
        G: Fn(u64, usize) -> Complex64 + Sync,
    {
        let (num, den) = self.weighted_sums(params, g)?;
        Ok(num / den)
    }

    fn mask_of(&self, edges: &[usize]) -> Result<u64> {
        edges.iter().try_fold(0u64, |m, &e| {
            self.region
                .local_index(e)
                .map(|i| m | 1 << i)
                .ok_or_else(|| Error::InvalidArgument(format!("edge {e} is not in the region")))
        })
    }

    /// `φ(g_A)` with `g_A = ∏_{e∈A} ω_e`, under the (possibly complex)
    /// parameters.
    pub fn observable_expectation(&self, a: &[usize], params: &ModelParams) -> Result<Complex64> {
        let am = self.mask_of(a)?;
        self.expectation(params, |mask, _| indicator(mask & am == am))
    }

    /// `G(z) = φ_β(α_z^{|ω|})`, the tilted expectation under the real
    /// measure at `β`.
    pub fn tilted_expectation(&self, params: &ModelParams) -> Result<Complex64> {
        let alpha = params.alpha()?;
        let real = ModelParams { z: Complex64::new(0.0, 0.0), ..*params };
        self.expectation(&real, |_, open| alpha.powu(open as u32))
    }

    /// `φ_β(α_z^{|ω|} g_A)`.
    pub fn tilted_observable(&self, a: &[usize], params: &ModelParams) -> Result<Complex64> {
        let am = self.mask_of(a)?;
        let alpha = params.alpha()?;
        let real = ModelParams { z: Complex64::new(0.0, 0.0), ..*params };
        self.expectation(&real, |mask, open| {
            if mask & am == am {
                alpha.powu(open as u32)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Probability of every configuration, indexed by local mask (real β).
    pub fn probabilities(&self, params: &ModelParams) -> Result<Vec<f64>> {
        self.check_cap()?;
        if self.region.len() > 26 {
            return Err(Error::CapExceeded {
                what: "probability table",
                needed: self.region.len(),
                cap: 26,
            });
        }
        let (xs, qs) = self.power_tables(params);
        let parts = self.fold_blocks(Vec::new, |acc: &mut Vec<(u64, f64)>, mask, open, kappa| {
            acc.push((mask, xs[open].re * qs[kappa]));
        })?;
        let mut out = vec![0.0; 1 << self.region.len()];
        let mut total = 0.0;
        for part in parts {
            for (m, w) in part {
                out[m as usize] = w;
                total += w;
            }
        }
        out.iter_mut().for_each(|p| *p /= total);
        Ok(out)
    }

    /// Law of the restriction to the listed ambient edges; index bit `j`
    /// is the state of `edges[j]`.
    pub fn marginal(&self, edges: &[usize], params: &ModelParams) -> Result<Vec<f64>> {
        let locals: Vec<usize> = edges
            .iter()
            .map(|&e| {
                self.region
                    .local_index(e)
                    .ok_or_else(|| Error::InvalidArgument(format!("edge {e} is not in the region")))
            })
            .collect::<Result<_>>()?;
        let probs = self.probabilities(params)?;
        let mut out = vec![0.0; 1 << locals.len()];
        for (mask, p) in probs.into_iter().enumerate() {
            let key = locals
                .iter()
                .enumerate()
                .fold(0usize, |k, (j, &i)| k | ((mask >> i) & 1) << j);
            out[key] += p;
        }
        Ok(out)
    }

    /// Counts of configurations by `(|ω|, κ)`.
    pub fn spectrum(&self) -> Result<ClusterSpectrum> {
        let n = self.region.len();
        let kmax = self.region.vertices().len() + 1;
        let parts = self.fold_blocks(
            || vec![vec![0u64; kmax + 1]; n + 1],
            |acc, _, open, kappa| acc[open][kappa] += 1,
        )?;
        let mut counts = vec![vec![0u64; kmax + 1]; n + 1];
        for part in parts {
            for (row, prow) in counts.iter_mut().zip(part) {
                for (c, p) in row.iter_mut().zip(prow) {
                    *c += p;
                }
            }
        }
        Ok(ClusterSpectrum { counts })
    }
}

fn indicator(b: bool) -> Complex64 {
    Complex64::new(if b { 1.0 } else { 0.0 }, 0.0)
}

/// Number of configurations with each `(|ω|, κ)`; the random-cluster
/// partition function in coefficient form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSpectrum {
    pub counts: Vec<Vec<u64>>,
}

impl ClusterSpectrum {
    pub fn partition(&self, params: &ModelParams) -> Complex64 {
        let x = params.complex_edge_factor();
        let mut total = Complex64::new(0.0, 0.0);
        let mut xk = Complex64::new(1.0, 0.0);
        for row in &self.counts {
            let inner: f64 = row
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(k, &c)| c as f64 * params.q.powi(k as i32))
                .sum();
            total += xk * inner;
            xk *= x;
        }
        total
    }

    /// Coefficient of `(e^{β+z}−1)^k` at cluster weight `q`.
    pub fn coefficients(&self, q: f64) -> Vec<f64> {
        self.counts
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(k, &c)| c as f64 * q.powi(k as i32))
                    .sum()
            })
            .collect()
    }
}

/// Random-cluster weight of a single configuration.
pub fn rc_weight(
    omega: &EdgeConfiguration,
    params: &ModelParams,
    bc: &BoundaryCondition,
) -> Result<Complex64> {
    let system = RcSystem::new(omega.region().clone(), bc.clone())?;
    Ok(system.weight(omega, params))
}

/// `Z^{RC,η}_{F,β,q}` by enumeration of all `2^{|F|}` configurations.
pub fn rc_partition(
    region: Arc<Region>,
    params: &ModelParams,
    bc: &BoundaryCondition,
) -> Result<Complex64> {
    RcSystem::new(region, bc.clone())?.partition(params)
}
