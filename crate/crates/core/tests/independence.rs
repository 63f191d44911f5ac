use rcx_core::coarse::{CoarseConfig, Mode};
use rcx_core::polymer::{draw_samples, Coupling, DynamicsCoupling};
use rcx_core::stats::mean_se;
use rcx_core::{ModelParams, TorusGeometry};

/// Covariance of `f` and `g` with a 1σ error from the centred products.
fn covariance(f: &[f64], g: &[f64]) -> (f64, f64) {
    let (mf, _) = mean_se(f);
    let (mg, _) = mean_se(g);
    let products: Vec<f64> = f.iter().zip(g).map(|(a, b)| (a - mf) * (b - mg)).collect();
    mean_se(&products)
}

#[test]
fn functions_on_separated_trivial_clusters_are_uncorrelated() {
    let torus = TorusGeometry::new(1, 7).unwrap();
    let config = CoarseConfig::new(1, 8.0, 8, Mode::Close).with_divisor(1.0);
    let coupling = DynamicsCoupling::new(torus, config, ModelParams::new(2.0, 0.02), 9).unwrap();
    let lattice = coupling.lattice().clone();
    assert_eq!(lattice.site_count(), 5);
    let samples = draw_samples(&coupling, 10_000, 0).unwrap();
    let (x1, x2) = (0, 2);
    let mut f = Vec::new();
    let mut g = Vec::new();
    for s in &samples {
        if s.clusters[x1] == [x1] && s.clusters[x2] == [x2] {
            f.push(f64::from(s.counts[x1]));
            g.push(f64::from(s.counts[x2]));
        }
    }
    assert!(f.len() >= 500, "only {} samples on the event", f.len());
    let (cov, se) = covariance(&f, &g);
    assert!(se > 0.0);
    assert!(cov.abs() <= 3.0 * se, "cov {cov} se {se} on {} samples", f.len());
}
