use serde::{Deserialize, Serialize};

use super::PolymerModel;
use crate::{Error, Result};

/// Outcome of the convergence criterion
/// `Σ_γ e^{g(γ)} |w(γ)| |δ(γ, γ') − 1| ≤ g(γ')` for every `γ'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpReport {
    pub passes: bool,
    /// `g(γ') − Σ_γ e^{g(γ)} |w(γ)| |δ(γ, γ') − 1|` per polymer.
    pub slack: Vec<f64>,
    /// Polymer with the smallest slack.
    pub worst: usize,
    /// `Σ_γ e^{g(γ)} |w(γ)|`.
    pub total: f64,
}

impl KpReport {
    pub fn worst_slack(&self) -> f64 {
        self.slack.get(self.worst).copied().unwrap_or(f64::INFINITY)
    }
}

pub fn kp_check(model: &PolymerModel, g: &[f64]) -> Result<KpReport> {
    let n = model.len();
    if g.len() != n {
        return Err(Error::InvalidArgument("one g value per polymer".into()));
    }
    if g.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument("g must be positive and finite".into()));
    }
    let mass: Vec<f64> = (0..n).map(|i| g[i].exp() * model.weight(i).norm()).collect();
    let slack: Vec<f64> = (0..n)
        .map(|j| g[j] - (0..n).map(|i| mass[i] * (model.delta(i, j) - 1.0).abs()).sum::<f64>())
        .collect();
    let worst = (0..n)
        .min_by(|&a, &b| slack[a].total_cmp(&slack[b]))
        .unwrap_or(0);
    let total: f64 = mass.iter().sum();
    Ok(KpReport {
        passes: slack.iter().all(|&s| s >= 0.0) && total.is_finite(),
        slack,
        worst,
        total,
    })
}

/// `g(γ) = a |γ|` with `|γ|` taken from the model's polymer sizes.
pub fn size_proportional_g(model: &PolymerModel, a: f64) -> Vec<f64> {
    model.sizes().iter().map(|&s| a * s as f64).collect()
}

/// The criterion with `g = a|γ|` for the first passing `a` in `scales`.
pub fn kp_check_scaled(model: &PolymerModel, scales: &[f64]) -> Result<Option<(f64, KpReport)>> {
    for &a in scales {
        let report = kp_check(model, &size_proportional_g(model, a))?;
        if report.passes {
            return Ok(Some((a, report)));
        }
    }
    Ok(None)
}

/// Default grid of `a` in `g = a|γ|`.
pub fn default_g_scales() -> Vec<f64> {
    (1..=80).map(|k| 0.05 * k as f64).collect()
}

/// Largest radius `r` of `radii` (ascending) such that the criterion holds,
/// with some `g = a|γ|`, for `models(r')` at every `r' ≤ r`. `models`
/// should return weight upper bounds valid on the circle `|z| = r'`.
pub fn certified_radius(
    radii: &[f64],
    scales: &[f64],
    mut models: impl FnMut(f64) -> Result<PolymerModel>,
) -> Result<Option<f64>> {
    let mut best = None;
    for &r in radii {
        if kp_check_scaled(&models(r)?, scales)?.is_none() {
            break;
        }
        best = Some(r);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_all_polymers, growth_constant_bound, CoarseLattice};
    use crate::TorusGeometry;
    use num_complex::Complex64;

    fn single(w: f64) -> PolymerModel {
        PolymerModel::hard_core(vec![Complex64::new(w, 0.0)], |_, _| true).unwrap()
    }

    #[test]
    fn boundary_case_at_inverse_e() {
        let inv_e = (-1.0f64).exp();
        assert!(kp_check(&single(inv_e - 1e-9), &[1.0]).unwrap().passes);
        assert!(!kp_check(&single(inv_e + 1e-9), &[1.0]).unwrap().passes);
    }

    #[test]
    fn zero_weights_have_slack_g() {
        let m = PolymerModel::hard_core(vec![Complex64::new(0.0, 0.0); 3], |_, _| true).unwrap();
        let r = kp_check(&m, &[0.5, 1.0, 2.0]).unwrap();
        assert!(r.passes);
        assert_eq!(r.slack, vec![0.5, 1.0, 2.0]);
    }

    #[test]
    fn lattice_weights_with_size_decay_pass() {
        let torus = TorusGeometry::new(2, 7).unwrap();
        let lattice = CoarseLattice::new(torus, 2).unwrap();
        let d: f64 = 2.0;
        let c_d = growth_constant_bound(&lattice, 3).unwrap();
        let polys = enumerate_all_polymers(&lattice, 3, 100_000).unwrap();
        let weights: Vec<Complex64> = polys
            .iter()
            .map(|p| Complex64::new((2.0 * (4.0 * d).exp() * c_d).powi(-(p.len() as i32)), 0.0))
            .collect();
        let m = PolymerModel::from_polymers(&lattice, &polys, weights).unwrap();
        let r = kp_check(&m, &size_proportional_g(&m, 4.0 * d)).unwrap();
        assert!(r.passes, "worst slack {}", r.worst_slack());
    }

    #[test]
    fn certified_radius_stops_at_first_failure() {
        let r = certified_radius(&[0.1, 0.2, 0.3, 0.4], &[1.0], |r| Ok(single(r))).unwrap();
        assert_eq!(r, Some(0.3));
        assert_eq!(certified_radius(&[0.5], &[1.0], |r| Ok(single(r))).unwrap(), None);
    }
}
