use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kp::{default_g_scales, kp_check_scaled};
use super::weights::WeightSamples;
use super::{ClusterTable, PolymerModel};
use crate::lattice::{enumerate_all_polymers, CoarseLattice, Polymer, TorusGeometry, DEFAULT_POLYMER_CAP};
use crate::rc::RcSystem;
use crate::stats::jackknife_se;
use crate::{BoundaryCondition, Error, ModelParams, Region, Result};

/// Default number of batches for resampling errors.
pub const DEFAULT_BATCHES: usize = 200;

/// Polymers of a coarse lattice up to a size, their hard-core interaction
/// and the cluster table built from it.
#[derive(Debug, Clone)]
pub struct PolymerSystem {
    lattice: CoarseLattice,
    polymers: Vec<Polymer>,
    model: PolymerModel,
    table: ClusterTable,
}

impl PolymerSystem {
    pub fn new(lattice: CoarseLattice, max_size: usize, max_order: usize) -> Result<Self> {
        let polymers = enumerate_all_polymers(&lattice, max_size, DEFAULT_POLYMER_CAP)?;
        let zeros = vec![Complex64::new(0.0, 0.0); polymers.len()];
        let model = PolymerModel::from_polymers(&lattice, &polymers, zeros)?;
        let table = ClusterTable::new(&model, max_order)?;
        Ok(Self {
            lattice,
            polymers,
            model,
            table,
        })
    }

    pub fn lattice(&self) -> &CoarseLattice {
        &self.lattice
    }

    pub fn polymers(&self) -> &[Polymer] {
        &self.polymers
    }

    pub fn table(&self) -> &ClusterTable {
        &self.table
    }

    pub fn model(&self, weights: Vec<Complex64>) -> Result<PolymerModel> {
        self.model.with_weights(weights)
    }

    /// `|T_N|`.
    pub fn volume(&self) -> f64 {
        self.lattice.torus().vertex_count() as f64
    }

    /// Criterion with `g = a|γ|` at the given weight bounds.
    pub fn certify(&self, bounds: &[f64]) -> Result<Option<f64>> {
        let model = self.model(bounds.iter().map(|&b| Complex64::new(b, 0.0)).collect())?;
        Ok(kp_check_scaled(&model, &default_g_scales())?.map(|(a, _)| a))
    }
}

/// `F̂_{N,β}(z)` with its error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    pub z: Complex64,
    /// Partial sums through each order, divided by `|T_N|`.
    pub partial: Vec<Complex64>,
    pub estimate: Complex64,
    /// Truncation envelope, divided by `|T_N|`.
    pub envelope: f64,
    /// Batch-jackknife standard error.
    pub std_error: f64,
    pub exact: Option<Complex64>,
    /// `a` in `g = a|γ|` for which the criterion holds at the weights'
    /// upper confidence bounds; `None` means outside the certified disk.
    pub certified_with: Option<f64>,
}

impl PressureEstimate {
    pub fn certified(&self) -> bool {
        self.certified_with.is_some()
    }

    /// `|F̂ − F| ≤ envelope + k · se`, when the exact value is known.
    pub fn within_budget(&self, k: f64) -> Option<bool> {
        self.exact
            .map(|f| (self.estimate - f).norm() <= self.envelope + k * self.std_error)
    }
}

fn series_total(table: &ClusterTable, weights: &[Complex64]) -> Complex64 {
    table.evaluate(weights).iter().sum()
}

pub fn pressure_perturbation(
    system: &PolymerSystem,
    weights: &WeightSamples,
    exact: Option<Complex64>,
    batches: usize,
) -> Result<PressureEstimate> {
    check_polymers(system, weights)?;
    let volume = system.volume();
    let means = weights.means();
    let series = system.table.series(&means);
    let batch = weights.batch_means(batches);
    let std_error = jackknife_se(&batch, |w| series_total(&system.table, w)) / volume;
    Ok(PressureEstimate {
        z: weights.z,
        partial: series.partial.iter().map(|p| p / volume).collect(),
        estimate: series.total() / volume,
        envelope: series.envelope(series.max_order()) / volume,
        std_error,
        exact,
        certified_with: system.certify(&weights.upper_bounds(2.0))?,
    })
}

/// `F_{N,β}(z) = |T_N|^{−1} log φ^{per}_{N,β}(α_z^{|ω|})` by enumeration.
pub fn exact_pressure(torus: &TorusGeometry, params: &ModelParams) -> Result<Complex64> {
    let sys = RcSystem::new(Arc::new(Region::full(*torus)), BoundaryCondition::Periodic)?;
    Ok(sys.tilted_expectation(params)?.ln() / torus.vertex_count() as f64)
}

/// `φ_{β+z}(g_A) = φ_β(α_z^{|ω|} g_A) / φ_β(α_z^{|ω|})` by enumeration.
pub fn exact_correlation(torus: &TorusGeometry, a: &[usize], params: &ModelParams) -> Result<Complex64> {
    let sys = RcSystem::new(Arc::new(Region::full(*torus)), BoundaryCondition::Periodic)?;
    Ok(sys.tilted_observable(a, params)? / sys.tilted_expectation(params)?)
}

/// `exp(Σ̃ − Σ)` from modified and plain weights on common samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub z: Complex64,
    pub edges: Vec<usize>,
    pub estimate: Complex64,
    /// Bound on the truncation error of the ratio.
    pub envelope: f64,
    pub std_error: f64,
    pub exact: Option<Complex64>,
    pub certified_with: Option<f64>,
}

impl CorrelationEstimate {
    pub fn within_budget(&self, k: f64) -> Option<bool> {
        self.exact
            .map(|f| (self.estimate - f).norm() <= self.envelope + k * self.std_error)
    }
}

pub fn correlation_function(
    system: &PolymerSystem,
    edges: &[usize],
    plain: &WeightSamples,
    modified: &WeightSamples,
    exact: Option<Complex64>,
    batches: usize,
) -> Result<CorrelationEstimate> {
    check_polymers(system, plain)?;
    check_polymers(system, modified)?;
    if plain.sample_count() != modified.sample_count() {
        return Err(Error::InvalidArgument(
            "plain and modified weights must share their samples".into(),
        ));
    }
    let n = system.polymers.len();
    let plain_series = system.table.series(&plain.means());
    let modified_series = system.table.series(&modified.means());
    let exponent = modified_series.total() - plain_series.total();
    let estimate = exponent.exp();
    let truncation =
        plain_series.envelope(plain_series.max_order()) + modified_series.envelope(modified_series.max_order());
    let joint: Vec<Vec<Complex64>> = plain
        .batch_means(batches)
        .into_iter()
        .zip(modified.batch_means(batches))
        .map(|(mut p, m)| {
            p.extend(m);
            p
        })
        .collect();
    let std_error = jackknife_se(&joint, |w| {
        (series_total(&system.table, &w[n..]) - series_total(&system.table, &w[..n])).exp()
    });
    let certified_with = match (
        system.certify(&plain.upper_bounds(2.0))?,
        system.certify(&modified.upper_bounds(2.0))?,
    ) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    Ok(CorrelationEstimate {
        z: plain.z,
        edges: edges.to_vec(),
        estimate,
        envelope: estimate.norm() * truncation.exp_m1(),
        std_error,
        exact,
        certified_with,
    })
}

fn check_polymers(system: &PolymerSystem, weights: &WeightSamples) -> Result<()> {
    if weights.polymers != system.polymers {
        return Err(Error::InvalidArgument(
            "weights were estimated for a different polymer list".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse::{CoarseConfig, Mode};
    use crate::polymer::weights::{draw_samples, weight_samples, Coupling, DynamicsCoupling, SiteActivity, WeightOptions};

    fn setup(seed: u64, count: usize) -> (PolymerSystem, DynamicsCoupling, Vec<crate::polymer::CouplingSample>) {
        let torus = TorusGeometry::new(1, 4).unwrap();
        let coupling = DynamicsCoupling::new(
            torus,
            CoarseConfig::new(1, 2.0, 3, Mode::Close),
            ModelParams::new(2.0, 0.7),
            seed,
        )
        .unwrap();
        let samples = draw_samples(&coupling, count, 0).unwrap();
        let system = PolymerSystem::new(coupling.lattice().clone(), 3, 8).unwrap();
        (system, coupling, samples)
    }

    #[test]
    fn zero_z_gives_zero_pressure() {
        let (system, coupling, samples) = setup(1, 50);
        let params = *coupling.params();
        let act = SiteActivity::plain(&params).unwrap();
        let ws = weight_samples(&samples, system.lattice(), system.polymers(), &act, params.z, WeightOptions::default()).unwrap();
        let p = pressure_perturbation(&system, &ws, None, 10).unwrap();
        assert_eq!(p.estimate, Complex64::new(0.0, 0.0));
        assert_eq!(p.envelope, 0.0);
        assert!(p.certified());
    }

    #[test]
    fn empty_observable_gives_one() {
        let (system, coupling, samples) = setup(2, 50);
        let params = coupling.params().with_z(Complex64::new(0.02, 0.01));
        let plain = SiteActivity::plain(&params).unwrap();
        let modified = SiteActivity::modified(&params, system.lattice(), &[]).unwrap();
        let opts = WeightOptions::default();
        let p = weight_samples(&samples, system.lattice(), system.polymers(), &plain, params.z, opts).unwrap();
        let m = weight_samples(&samples, system.lattice(), system.polymers(), &modified, params.z, opts).unwrap();
        let c = correlation_function(&system, &[], &p, &m, None, 10).unwrap();
        assert_eq!(c.estimate, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn single_block_is_exactly_summable() {
        // one coarse site: one polymer, and Z = 1 + w = φ(α^{|ω|})
        let torus = TorusGeometry::new(1, 1).unwrap();
        let lattice = CoarseLattice::new(torus, 1).unwrap();
        let system = PolymerSystem::new(lattice, 1, 8).unwrap();
        assert_eq!(system.polymers().len(), 1);
        let params = ModelParams::new(2.0, 0.9).with_z(Complex64::new(0.005, 0.002));
        let g = RcSystem::new(Arc::new(Region::full(torus)), BoundaryCondition::Periodic)
            .unwrap()
            .tilted_expectation(&params)
            .unwrap();
        let series = system.table().series(&[g - 1.0]);
        let exact = exact_pressure(&torus, &params).unwrap();
        assert!((series.total() / system.volume() - exact).norm() < 1e-14);
    }

    #[test]
    fn small_z_pressure_within_budget() {
        let (system, coupling, samples) = setup(3, 4000);
        for z in [Complex64::new(0.03, 0.0), Complex64::new(-0.02, 0.03)] {
            let params = coupling.params().with_z(z);
            let act = SiteActivity::plain(&params).unwrap();
            let ws = weight_samples(&samples, system.lattice(), system.polymers(), &act, z, WeightOptions::default()).unwrap();
            let exact = exact_pressure(system.lattice().torus(), &params).unwrap();
            let p = pressure_perturbation(&system, &ws, Some(exact), DEFAULT_BATCHES).unwrap();
            assert!(p.within_budget(3.0).unwrap(), "{p:?}");
        }
    }
}
