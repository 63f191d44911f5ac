use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cftp::{DoublingPolicy, Sampler};
use crate::coarse::{classify_field, layer_zero_clusters, BoxClassifier, CoarseConfig};
use crate::glauber::ScheduleSource;
use crate::lattice::{CoarseLattice, Polymer, TorusGeometry};
use crate::stats::complex_mean_se;
use crate::{BoundaryCondition, EdgeConfiguration, Error, ModelParams, Region, Result};

/// Largest polymer whose subsets `A ⊆ γ` are enumerated.
pub const MAX_WEIGHT_POLYMER: usize = 12;

/// `f_x(ω) = α_z^{|ω ∩ E_L(x)|} − 1`.
pub fn block_function(
    omega: &EdgeConfiguration,
    lattice: &CoarseLattice,
    x: usize,
    params: &ModelParams,
) -> Result<Complex64> {
    let alpha = params.alpha()?;
    let mut count = 0u32;
    for e in lattice.block_edges(x) {
        match omega.get_edge(e) {
            Some(true) => count += 1,
            Some(false) => {}
            None => {
                return Err(Error::InvalidArgument(format!(
                    "edge {e} of block {x} is outside the configuration window"
                )))
            }
        }
    }
    Ok(alpha.powu(count) - 1.0)
}

/// One draw `(ω, C)` from a coupling: the configuration on the torus and
/// the spatial projection `C_x` of every information cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSample {
    pub omega: EdgeConfiguration,
    /// `|ω ∩ E_L(x)|` per coarse site.
    pub counts: Vec<u32>,
    /// Sorted `C_x` per coarse site; always contains `x`.
    pub clusters: Vec<Vec<usize>>,
    /// Number of clusters that reached the deepest classified layer.
    pub truncated: usize,
}

impl CouplingSample {
    fn new(omega: EdgeConfiguration, lattice: &CoarseLattice, clusters: Vec<Vec<usize>>, truncated: usize) -> Self {
        let counts = (0..lattice.site_count())
            .map(|x| {
                lattice
                    .block_edges(x)
                    .into_iter()
                    .filter(|&e| omega.get_edge(e) == Some(true))
                    .count() as u32
            })
            .collect();
        Self {
            omega,
            counts,
            clusters,
            truncated,
        }
    }
}

/// A joint law of `ω ~ φ_β` on the torus and information clusters.
pub trait Coupling: Sync {
    fn lattice(&self) -> &CoarseLattice;
    fn params(&self) -> &ModelParams;
    fn draw(&self, replica: u64) -> Result<CouplingSample>;
}

/// Draws replicas `first, first + 1, …` in parallel; any failure aborts.
pub fn draw_samples(coupling: &dyn Coupling, count: usize, first: u64) -> Result<Vec<CouplingSample>> {
    (0..count as u64)
        .into_par_iter()
        .map(|k| coupling.draw(first + k))
        .collect()
}

/// Independent percolation (`q = 1`) with trivial clusters `C_x = {x}`.
#[derive(Debug, Clone)]
pub struct PlantedCoupling {
    lattice: CoarseLattice,
    params: ModelParams,
    region: Arc<Region>,
    seed: u64,
}

impl PlantedCoupling {
    pub fn new(lattice: CoarseLattice, params: ModelParams, seed: u64) -> Result<Self> {
        params.validate()?;
        if params.q != 1.0 {
            return Err(Error::InvalidArgument(
                "the planted coupling is exact only for q = 1".into(),
            ));
        }
        Ok(Self {
            region: Arc::new(Region::full(*lattice.torus())),
            params: real(params),
            lattice,
            seed,
        })
    }

    fn open_probability(&self) -> f64 {
        self.params.p_connected()
    }

    /// Exact weights under this coupling: only `A = γ` has union `γ`, so
    /// `w(γ) = ∏_{x∈γ} E f_x`.
    pub fn exact_weights(&self, polymers: &[Polymer], z: Complex64) -> Result<Vec<WeightEstimate>> {
        let alpha = self.params.with_z(z).alpha()?;
        let p = self.open_probability();
        polymers
            .iter()
            .map(|poly| {
                let estimate = poly
                    .sites()
                    .iter()
                    .map(|&x| {
                        let n = self.lattice.block_edges(x).len() as u32;
                        (alpha * p + (1.0 - p)).powu(n) - 1.0
                    })
                    .product();
                Ok(WeightEstimate {
                    polymer: poly.clone(),
                    z,
                    estimate,
                    std_error: 0.0,
                    samples: 0,
                    variant: EstimatorVariant::Exact,
                })
            })
            .collect()
    }
}

impl Coupling for PlantedCoupling {
    fn lattice(&self) -> &CoarseLattice {
        &self.lattice
    }

    fn params(&self) -> &ModelParams {
        &self.params
    }

    fn draw(&self, replica: u64) -> Result<CouplingSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replica);
        let p = self.open_probability();
        let mut omega = EdgeConfiguration::empty(self.region.clone());
        for i in 0..omega.len() {
            omega.set(i, rng.random_bool(p));
        }
        let clusters = (0..self.lattice.site_count()).map(|x| vec![x]).collect();
        Ok(CouplingSample::new(omega, &self.lattice, clusters, 0))
    }
}

/// `ω` by coupling from the past on the periodic torus, and `C_x` from the
/// good/bad classification driven by the same clock rings.
#[derive(Debug, Clone)]
pub struct DynamicsCoupling {
    lattice: CoarseLattice,
    params: ModelParams,
    classifier: BoxClassifier,
    sampler: Sampler,
    policy: DoublingPolicy,
    seed: u64,
}

impl DynamicsCoupling {
    pub fn new(torus: TorusGeometry, config: CoarseConfig, params: ModelParams, seed: u64) -> Result<Self> {
        let params = real(params);
        let lattice = CoarseLattice::new(torus, config.scale)?;
        let classifier = BoxClassifier::new(torus, config, params)?;
        let region = Arc::new(Region::full(torus));
        let sampler = Sampler::new(region.clone(), region.clone(), params, BoundaryCondition::Periodic)?;
        Ok(Self {
            lattice,
            params,
            classifier,
            sampler,
            policy: DoublingPolicy::for_region(&region),
            seed,
        })
    }

    pub fn with_policy(mut self, policy: DoublingPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn classifier(&self) -> &BoxClassifier {
        &self.classifier
    }
}

impl Coupling for DynamicsCoupling {
    fn lattice(&self) -> &CoarseLattice {
        &self.lattice
    }

    fn params(&self) -> &ModelParams {
        &self.params
    }

    fn draw(&self, replica: u64) -> Result<CouplingSample> {
        let source = ScheduleSource::new(self.seed, replica);
        let run = self.sampler.sample(&source, &self.policy);
        let omega = match run.sample {
            Some(omega) if run.coalesced => omega,
            _ => return Err(Error::NotCoalesced { horizon: run.horizon }),
        };
        let horizon = run.horizon.max(self.classifier.config().depth());
        let sched = source.sample(self.sampler.volume().edges(), horizon);
        let field = classify_field(&self.classifier, &sched)?;
        let clusters = layer_zero_clusters(&field);
        let truncated = clusters.iter().filter(|c| c.truncated).count();
        let projections = clusters.into_iter().map(|c| c.projection).collect();
        Ok(CouplingSample::new(omega, &self.lattice, projections, truncated))
    }
}

fn real(params: ModelParams) -> ModelParams {
    params.with_z(Complex64::new(0.0, 0.0))
}

/// The per-site factors entering a weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteActivity {
    alpha: Complex64,
    /// `A ∩ E_L(x)` for the sites of `Δ_A`.
    observed: BTreeMap<usize, Vec<usize>>,
}

impl SiteActivity {
    /// `f_x = α_z^{k} − 1`.
    pub fn plain(params: &ModelParams) -> Result<Self> {
        Ok(Self {
            alpha: params.alpha()?,
            observed: BTreeMap::new(),
        })
    }

    /// `f̃_x = α_z^{k} g_{A∩E_L(x)} − 1` on `Δ_A`, `f_x` elsewhere.
    pub fn modified(params: &ModelParams, lattice: &CoarseLattice, a: &[usize]) -> Result<Self> {
        let torus = lattice.torus();
        let mut observed: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &e in a {
            if e >= torus.edge_count() {
                return Err(Error::InvalidArgument(format!("edge {e} is not on the torus")));
            }
            observed
                .entry(lattice.site_of_vertex(torus.edge_base(e)))
                .or_default()
                .push(e);
        }
        Ok(Self {
            alpha: params.alpha()?,
            observed,
        })
    }

    /// `Δ_A`.
    pub fn observed_sites(&self) -> Vec<usize> {
        self.observed.keys().copied().collect()
    }

    pub fn value(&self, sample: &CouplingSample, x: usize) -> Complex64 {
        if let Some(edges) = self.observed.get(&x) {
            if edges.iter().any(|&e| sample.omega.get_edge(e) != Some(true)) {
                return Complex64::new(-1.0, 0.0);
            }
        }
        self.alpha.powu(sample.counts[x]) - 1.0
    }

    /// `max_{ω} |f_x(ω)|` over configurations of a block with `edges` edges.
    pub fn max_abs(&self, edges: usize) -> f64 {
        let plain = (0..=edges as u32)
            .map(|k| (self.alpha.powu(k) - 1.0).norm())
            .fold(0.0, f64::max);
        if self.observed.is_empty() {
            plain
        } else {
            plain.max(1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorVariant {
    Exact,
    MonteCarlo,
}

/// `ŵ_z(γ)` with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEstimate {
    pub polymer: Polymer,
    pub z: Complex64,
    pub estimate: Complex64,
    pub std_error: f64,
    pub samples: usize,
    pub variant: EstimatorVariant,
}

/// Per-sample contributions to every polymer weight, kept so that derived
/// quantities can be resampled.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSamples {
    pub polymers: Vec<Polymer>,
    pub z: Complex64,
    /// Sample-major: `values[s][γ]`.
    pub values: Vec<Vec<Complex64>>,
}

impl WeightSamples {
    pub fn sample_count(&self) -> usize {
        self.values.len()
    }

    pub fn means(&self) -> Vec<Complex64> {
        let n = self.values.len().max(1) as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.polymers.len()];
        for row in &self.values {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out.iter().map(|v| v / n).collect()
    }

    pub fn estimates(&self) -> Vec<WeightEstimate> {
        (0..self.polymers.len())
            .map(|j| {
                let column: Vec<Complex64> = self.values.iter().map(|row| row[j]).collect();
                let (estimate, std_error) = complex_mean_se(&column);
                WeightEstimate {
                    polymer: self.polymers[j].clone(),
                    z: self.z,
                    estimate,
                    std_error,
                    samples: column.len(),
                    variant: EstimatorVariant::MonteCarlo,
                }
            })
            .collect()
    }

    /// `|ŵ| + k · se` per polymer.
    pub fn upper_bounds(&self, k: f64) -> Vec<f64> {
        self.estimates()
            .iter()
            .map(|e| e.estimate.norm() + k * e.std_error)
            .collect()
    }

    /// Means over `batches` contiguous batches of equal size (the remainder
    /// is dropped).
    pub fn batch_means(&self, batches: usize) -> Vec<Vec<Complex64>> {
        let batches = batches.clamp(1, self.values.len().max(1));
        let size = self.values.len() / batches;
        if size == 0 {
            return Vec::new();
        }
        self.values
            .chunks_exact(size)
            .take(batches)
            .map(|chunk| {
                let mut acc = vec![Complex64::new(0.0, 0.0); self.polymers.len()];
                for row in chunk {
                    for (a, v) in acc.iter_mut().zip(row) {
                        *a += v;
                    }
                }
                acc.iter().map(|v| v / size as f64).collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightOptions {
    /// Replace each weight by the mean over the translates of its shape.
    pub translation_average: bool,
}

impl Default for WeightOptions {
    fn default() -> Self {
        Self {
            translation_average: true,
        }
    }
}

/// `Σ_{∅≠A⊆γ} ∏_{x∈A} f_x(ω) 1{∪_{x∈A} C_x = γ}` for every polymer, on
/// common samples.
pub fn weight_samples(
    samples: &[CouplingSample],
    lattice: &CoarseLattice,
    polymers: &[Polymer],
    activity: &SiteActivity,
    z: Complex64,
    options: WeightOptions,
) -> Result<WeightSamples> {
    if let Some(p) = polymers.iter().find(|p| p.len() > MAX_WEIGHT_POLYMER) {
        return Err(Error::CapExceeded {
            what: "polymer size for weight estimation",
            needed: p.len(),
            cap: MAX_WEIGHT_POLYMER,
        });
    }
    let n_sites = lattice.site_count();
    let mut values: Vec<Vec<Complex64>> = samples
        .par_iter()
        .map(|sample| {
            let f: Vec<Complex64> = (0..n_sites).map(|x| activity.value(sample, x)).collect();
            polymers
                .iter()
                .map(|poly| polymer_value(poly, sample, &f))
                .collect()
        })
        .collect();
    if options.translation_average {
        let mut classes: HashMap<Polymer, Vec<usize>> = HashMap::new();
        for (j, p) in polymers.iter().enumerate() {
            classes.entry(p.shape(lattice)).or_default().push(j);
        }
        let groups: Vec<Vec<usize>> = classes.into_values().filter(|g| g.len() > 1).collect();
        values.par_iter_mut().for_each(|row| {
            for g in &groups {
                let mean = g.iter().map(|&j| row[j]).sum::<Complex64>() / g.len() as f64;
                for &j in g {
                    row[j] = mean;
                }
            }
        });
    }
    Ok(WeightSamples {
        polymers: polymers.to_vec(),
        z,
        values,
    })
}

fn polymer_value(poly: &Polymer, sample: &CouplingSample, f: &[Complex64]) -> Complex64 {
    let sites = poly.sites();
    let local = |y: usize| sites.binary_search(&y).ok();
    // sites whose cluster stays inside γ and whose factor can contribute
    let candidates: Vec<(Complex64, u32)> = sites
        .iter()
        .filter(|&&x| f[x] != Complex64::new(0.0, 0.0))
        .filter_map(|&x| {
            let mut mask = 0u32;
            for &y in &sample.clusters[x] {
                mask |= 1 << local(y)?;
            }
            Some((f[x], mask))
        })
        .collect();
    let full = (1u32 << sites.len()) - 1;
    let mut total = Complex64::new(0.0, 0.0);
    for subset in 1u32..1 << candidates.len() {
        let mut union = 0;
        let mut product = Complex64::new(1.0, 0.0);
        let mut rest = subset;
        while rest != 0 {
            let k = rest.trailing_zeros() as usize;
            union |= candidates[k].1;
            product *= candidates[k].0;
            rest &= rest - 1;
        }
        if union == full {
            total += product;
        }
    }
    total
}

/// `Σ_{k=1}^{n} C(n, k) f^k min(1, e^{a k − c n})`, the bound on `|w(γ)|`
/// for `|γ| = n` from `P(|C_A| ≥ n) ≤ e^{a|A| − c n}`.
pub fn weight_envelope(size: usize, max_f: f64, rate: f64, a: f64) -> f64 {
    let mut binom = 1.0;
    let mut total = 0.0;
    for k in 1..=size {
        binom *= (size + 1 - k) as f64 / k as f64;
        let tail = (a * k as f64 - rate * size as f64).exp().min(1.0);
        total += binom * max_f.powi(k as i32) * tail;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_all_polymers;
    use crate::rc::RcSystem;

    fn ring() -> CoarseLattice {
        CoarseLattice::new(TorusGeometry::new(1, 4).unwrap(), 1).unwrap()
    }

    fn sample(lattice: &CoarseLattice, open: &[usize], clusters: Vec<Vec<usize>>) -> CouplingSample {
        let region = Arc::new(Region::full(*lattice.torus()));
        let omega = EdgeConfiguration::from_open_edges(region, open).unwrap();
        CouplingSample::new(omega, lattice, clusters, 0)
    }

    #[test]
    fn block_function_examples() {
        let lattice = ring();
        let params = ModelParams::new(2.0, 1.0).with_z(Complex64::new(0.03, 0.01));
        let alpha = params.alpha().unwrap();
        let region = Arc::new(Region::full(*lattice.torus()));
        let empty = EdgeConfiguration::empty(region.clone());
        assert_eq!(block_function(&empty, &lattice, 0, &params).unwrap(), Complex64::new(0.0, 0.0));
        let e = lattice.block_edges(1)[0];
        let one = EdgeConfiguration::from_open_edges(region.clone(), &[e]).unwrap();
        assert!((block_function(&one, &lattice, 1, &params).unwrap() - (alpha - 1.0)).norm() < 1e-15);
        let full = EdgeConfiguration::full(region);
        let zero = ModelParams::new(2.0, 1.0);
        assert_eq!(block_function(&full, &lattice, 2, &zero).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn subset_sum_by_hand() {
        let lattice = ring();
        let params = ModelParams::new(2.0, 1.0).with_z(Complex64::new(0.05, 0.0));
        let act = SiteActivity::plain(&params).unwrap();
        let alpha = params.alpha().unwrap();
        // C_0 = {0, 1}, C_1 = {1}, C_2 = {2}; one open edge in every block
        let open: Vec<usize> = (0..3).map(|x| lattice.block_edges(x)[0]).collect();
        let s = sample(&lattice, &open, vec![vec![0, 1], vec![1], vec![2]]);
        let polys = enumerate_all_polymers(&lattice, 3, 100).unwrap();
        let ws = weight_samples(&[s], &lattice, &polys, &act, params.z, WeightOptions { translation_average: false }).unwrap();
        let f = alpha - 1.0;
        let w: HashMap<Vec<usize>, Complex64> = polys
            .iter()
            .zip(&ws.values[0])
            .map(|(p, v)| (p.sites().to_vec(), *v))
            .collect();
        let close = |a: Complex64, b: Complex64| (a - b).norm() < 1e-14;
        assert!(close(w[&vec![0]], Complex64::new(0.0, 0.0)));
        assert!(close(w[&vec![1]], f));
        assert!(close(w[&vec![2]], f));
        // {0}, {0, 1}
        assert!(close(w[&vec![0, 1]], f + f * f));
        assert!(close(w[&vec![1, 2]], f * f));
        assert!(close(w[&vec![0, 2]], Complex64::new(0.0, 0.0)));
        // {0, 2}, {0, 1, 2}
        assert!(close(w[&vec![0, 1, 2]], f * f + f * f * f));
        // every A lands on exactly one polymer on a three-site ring
        let total: Complex64 = ws.values[0].iter().sum();
        assert!(close(total, (f + 1.0).powu(3) - 1.0));
    }

    #[test]
    fn mayer_identity_by_enumeration() {
        let lattice = ring();
        let torus = *lattice.torus();
        let region = Arc::new(Region::full(torus));
        let sys = RcSystem::new(region.clone(), BoundaryCondition::Periodic).unwrap();
        let params = ModelParams::new(2.0, 0.8).with_z(Complex64::new(0.04, -0.02));
        let alpha = params.alpha().unwrap();
        let real = params.with_z(Complex64::new(0.0, 0.0));
        let block_of: Vec<usize> = region
            .edges()
            .iter()
            .map(|&e| lattice.site_of_vertex(torus.edge_base(e)))
            .collect();
        let sites = lattice.site_count();
        let mut regrouped = Complex64::new(0.0, 0.0);
        for a in 0u32..1 << sites {
            regrouped += sys
                .expectation(&real, |mask, _| {
                    let mut counts = vec![0u32; sites];
                    for (i, &x) in block_of.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            counts[x] += 1;
                        }
                    }
                    (0..sites)
                        .filter(|x| a >> x & 1 == 1)
                        .map(|x| alpha.powu(counts[x]) - 1.0)
                        .product()
                })
                .unwrap();
        }
        let direct = sys.tilted_expectation(&params).unwrap();
        assert!((regrouped - direct).norm() < 1e-12);
    }

    #[test]
    fn planted_factorization_is_exact() {
        // q = 1: blocks are independent, so E[∏_{A} f_x] = ∏_{A} E f_x,
        // which is the product over the components of A
        let lattice = ring();
        let torus = *lattice.torus();
        let region = Arc::new(Region::full(torus));
        let sys = RcSystem::new(region.clone(), BoundaryCondition::Periodic).unwrap();
        let params = ModelParams::new(1.0, 0.7).with_z(Complex64::new(0.05, 0.02));
        let alpha = params.alpha().unwrap();
        let real = params.with_z(Complex64::new(0.0, 0.0));
        let coupling = PlantedCoupling::new(lattice.clone(), params, 0).unwrap();
        let polys = enumerate_all_polymers(&lattice, 3, 100).unwrap();
        let exact = coupling.exact_weights(&polys, params.z).unwrap();
        let block_of: Vec<usize> = region
            .edges()
            .iter()
            .map(|&e| lattice.site_of_vertex(torus.edge_base(e)))
            .collect();
        let moment = |a: u32| {
            sys.expectation(&real, |mask, _| {
                let mut counts = [0u32; 3];
                for (i, &x) in block_of.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        counts[x] += 1;
                    }
                }
                (0..3)
                    .filter(|x| a >> x & 1 == 1)
                    .map(|x| alpha.powu(counts[x]) - 1.0)
                    .product()
            })
            .unwrap()
        };
        for a in 1u32..8 {
            let product: Complex64 = (0..3)
                .filter(|x| a >> x & 1 == 1)
                .map(|x| exact.iter().find(|w| w.polymer.sites() == [x]).unwrap().estimate)
                .product();
            assert!((moment(a) - product).norm() < 1e-12);
        }
        for w in &exact {
            let mask = w.polymer.sites().iter().fold(0u32, |m, &x| m | 1 << x);
            assert!((w.estimate - moment(mask)).norm() < 1e-12);
        }
    }

    #[test]
    fn planted_monte_carlo_matches_exact() {
        let lattice = ring();
        let params = ModelParams::new(1.0, 0.9).with_z(Complex64::new(0.05, -0.03));
        let coupling = PlantedCoupling::new(lattice.clone(), params, 5).unwrap();
        let samples = draw_samples(&coupling, 20_000, 0).unwrap();
        let polys = enumerate_all_polymers(&lattice, 3, 100).unwrap();
        let act = SiteActivity::plain(&params).unwrap();
        let est = weight_samples(&samples, &lattice, &polys, &act, params.z, WeightOptions::default())
            .unwrap()
            .estimates();
        for (e, x) in est.iter().zip(coupling.exact_weights(&polys, params.z).unwrap()) {
            assert!((e.estimate - x.estimate).norm() <= 4.0 * e.std_error + 1e-15, "{e:?} vs {x:?}");
        }
    }

    #[test]
    fn zero_z_gives_zero_weights() {
        let torus = TorusGeometry::new(1, 4).unwrap();
        let params = ModelParams::new(2.0, 0.6);
        let coupling = DynamicsCoupling::new(torus, CoarseConfig::new(1, 2.0, 3, crate::coarse::Mode::Close), params, 3).unwrap();
        let samples = draw_samples(&coupling, 20, 0).unwrap();
        assert!(samples.iter().all(|s| s.clusters.iter().enumerate().all(|(x, c)| c.contains(&x))));
        let polys = enumerate_all_polymers(coupling.lattice(), 3, 100).unwrap();
        let act = SiteActivity::plain(&params).unwrap();
        let ws = weight_samples(&samples, coupling.lattice(), &polys, &act, params.z, WeightOptions::default()).unwrap();
        assert!(ws.values.iter().flatten().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn dynamics_coupling_is_reproducible() {
        let torus = TorusGeometry::new(1, 4).unwrap();
        let config = CoarseConfig::new(1, 2.0, 3, crate::coarse::Mode::Close);
        let params = ModelParams::new(2.0, 0.6);
        let a = DynamicsCoupling::new(torus, config, params, 9).unwrap();
        assert_eq!(a.draw(4).unwrap(), a.draw(4).unwrap());
    }

    #[test]
    fn envelope_matches_closed_form_without_tail_cap() {
        // a = 0, large rate: Σ C(n,k) f^k e^{−c n} = ((1+f)^n − 1) e^{−c n}
        let (n, f, c): (usize, f64, f64) = (5, 0.3, 2.0);
        let expected = ((1.0 + f).powi(n as i32) - 1.0) * (-c * n as f64).exp();
        assert!((weight_envelope(n, f, c, 0.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn modified_activity_kills_closed_observed_edges() {
        let lattice = ring();
        let params = ModelParams::new(2.0, 1.0);
        let e = lattice.block_edges(2)[1];
        let act = SiteActivity::modified(&params, &lattice, &[e]).unwrap();
        assert_eq!(act.observed_sites(), vec![2]);
        let closed = sample(&lattice, &[], vec![vec![0], vec![1], vec![2]]);
        let open = sample(&lattice, &[e], vec![vec![0], vec![1], vec![2]]);
        assert_eq!(act.value(&closed, 2), Complex64::new(-1.0, 0.0));
        assert_eq!(act.value(&open, 2), Complex64::new(0.0, 0.0));
        assert_eq!(act.value(&closed, 1), Complex64::new(0.0, 0.0));
    }
}
