use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcx_core::polymer::{cluster_expansion, kp_check, kp_check_scaled, default_g_scales, PolymerModel};
use rcx_core::Complex64;

fn random_model(rng: &mut ChaCha8Rng, scale: f64) -> PolymerModel {
    let n = rng.random_range(1..=6);
    let weights: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(rng.random_range(0.0..scale), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let bits: Vec<bool> = (0..n * n).map(|_| rng.random_bool(0.5)).collect();
    PolymerModel::hard_core(weights, |i, j| i == j || bits[i.min(j) * n + i.max(j)]).unwrap()
}

#[test]
fn passing_criterion_implies_nonzero_partition_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut passed = 0;
    for k in 0..2000 {
        let m = random_model(&mut rng, 0.05 + 0.4 * (k % 10) as f64 / 10.0);
        if let Some((_, report)) = kp_check_scaled(&m, &default_g_scales()).unwrap() {
            assert!(report.passes);
            assert!(m.partition_exact().unwrap().norm() > 0.0);
            passed += 1;
        }
    }
    assert!(passed > 500);
}

#[test]
fn truncation_envelope_bounds_the_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let m = random_model(&mut rng, 0.1);
        if !kp_check(&m, &vec![1.0; m.len()]).unwrap().passes {
            continue;
        }
        let exact = m.partition_exact().unwrap().ln();
        let s = cluster_expansion(&m, 8).unwrap();
        for n in 1..=8 {
            assert!((s.sum_to(n) - exact).norm() <= s.envelope(n) + 1e-13);
        }
    }
}
