use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ClassificationField;
use crate::stats::{linear_fit, Proportion};
use crate::{Error, Result};

/// One point of an empirical survival curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub k: usize,
    /// Number of samples with size at least `k`.
    pub count: u64,
    pub survival: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Survival curve `P(|C| ≥ k)` with a log-linear fit `log P ≈ log c' − c k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub samples: u64,
    pub curve: Vec<SurvivalPoint>,
    /// Fitted `c`; `+∞` when the support is degenerate.
    pub rate: f64,
    /// Fitted `c'`.
    pub prefactor: f64,
    pub r_squared: f64,
    /// Largest `k` used in the fit.
    pub fit_max: usize,
}

impl TailFit {
    pub fn is_degenerate(&self) -> bool {
        self.rate.is_infinite()
    }

    /// Points whose counts reach `min_count`.
    pub fn supported(&self, min_count: u64) -> impl Iterator<Item = &SurvivalPoint> {
        self.curve.iter().filter(move |p| p.count >= min_count)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("# survival v1\nk,survival,ci_low,ci_high\n");
        for p in &self.curve {
            out.push_str(&format!("{},{},{},{}\n", p.k, p.survival, p.ci_low, p.ci_high));
        }
        out
    }
}

/// Survival curve of `sizes` (all ≥ 1) fitted over the `k` whose counts
/// are at least `min_count`.
pub fn tail_estimate(sizes: &[usize], min_count: u64) -> Result<TailFit> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("no cluster sizes".into()));
    }
    let n = sizes.len() as u64;
    let max = *sizes.iter().max().unwrap();
    let mut at_least = vec![0u64; max + 2];
    for &s in sizes {
        at_least[s] += 1;
    }
    for k in (0..=max).rev() {
        at_least[k] += at_least[k + 1];
    }
    let curve: Vec<SurvivalPoint> = (1..=max)
        .map(|k| {
            let p = Proportion::new(at_least[k], n);
            let (lo, hi) = p.wilson(1.96);
            SurvivalPoint {
                k,
                count: at_least[k],
                survival: p.estimate(),
                ci_low: lo,
                ci_high: hi,
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .iter()
        .take_while(|p| p.count >= min_count.max(1))
        .map(|p| (p.k as f64, p.survival.ln()))
        .unzip();
    let fit_max = xs.last().map_or(0, |&k| k as usize);
    Ok(match linear_fit(&xs, &ys) {
        Some(f) if max > 1 => TailFit {
            samples: n,
            curve,
            rate: -f.slope,
            prefactor: f.intercept.exp(),
            r_squared: f.r_squared,
            fit_max,
        },
        _ => TailFit {
            samples: n,
            curve,
            rate: f64::INFINITY,
            prefactor: 1.0,
            r_squared: 1.0,
            fit_max,
        },
    })
}

/// `P(|C_Δ| ≥ l) ≈ e^{−c l} e^{a |Δ|}` fitted from per-size tails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiAnchorFit {
    pub rate: f64,
    pub a: f64,
    pub per_size: Vec<(usize, TailFit)>,
}

/// `samples` are `(|Δ|, |C_Δ|)` pairs.
pub fn multi_anchor_fit(samples: &[(usize, usize)], min_count: u64) -> Result<MultiAnchorFit> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(m, size) in samples {
        groups.entry(m).or_default().push(size);
    }
    let per_size = groups
        .into_iter()
        .map(|(m, sizes)| Ok((m, tail_estimate(&sizes, min_count)?)))
        .collect::<Result<Vec<_>>>()?;
    let finite: Vec<&(usize, TailFit)> = per_size.iter().filter(|(_, f)| !f.is_degenerate()).collect();
    if finite.is_empty() {
        return Ok(MultiAnchorFit {
            rate: f64::INFINITY,
            a: 0.0,
            per_size,
        });
    }
    let rate = finite.iter().map(|(_, f)| f.rate).sum::<f64>() / finite.len() as f64;
    // with the common rate, a |Δ| bounds log c'_Δ
    let a = finite
        .iter()
        .map(|(m, f)| (f.prefactor.ln() / *m as f64).max(0.0))
        .fold(0.0, f64::max);
    Ok(MultiAnchorFit { rate, a, per_size })
}

/// Empirical bad-site frequency `p̂_L` of a family of classification fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationEstimate {
    pub scale: usize,
    pub bad: Proportion,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl DominationEstimate {
    pub fn estimate(&self) -> f64 {
        self.bad.estimate()
    }
}

pub fn domination_estimate(fields: &[ClassificationField]) -> Result<DominationEstimate> {
    let total: usize = fields.iter().map(|f| f.boxes.len()).sum();
    if total < 1000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1000 classified boxes, got {total}"
        )));
    }
    let scale = fields[0].lattice.base().scale();
    if fields.iter().any(|f| f.lattice.base().scale() != scale) {
        return Err(Error::InvalidArgument("fields of different scales".into()));
    }
    let bad: usize = fields.iter().map(ClassificationField::bad_count).sum();
    let bad = Proportion::new(bad as u64, total as u64);
    let (ci_low, ci_high) = bad.wilson(1.96);
    Ok(DominationEstimate {
        scale,
        bad,
        ci_low,
        ci_high,
    })
}
