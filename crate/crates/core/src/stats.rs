//! Small estimators shared by the Monte Carlo modules.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(hits: u64, trials: u64) -> Self {
        Self { hits, trials }
    }

    pub fn estimate(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.hits as f64 / self.trials as f64
    }

    pub fn std_error(&self) -> f64 {
        let p = self.estimate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Wilson score interval at normal quantile `z`.
    pub fn wilson(&self, z: f64) -> (f64, f64) {
        let n = self.trials as f64;
        let p = self.estimate();
        let denom = 1.0 + z * z / n;
        let centre = (p + z * z / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
        ((centre - half).max(0.0), (centre + half).min(1.0))
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Complex mean with the standard error of its modulus-scale fluctuation,
/// `sqrt(Σ|x − x̄|² / (n(n−1)))`.
pub fn complex_mean_se(xs: &[Complex64]) -> (Complex64, f64) {
    let n = xs.len() as f64;
    let mean: Complex64 = xs.iter().sum::<Complex64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).norm_sqr()).sum();
    (mean, (ss / (n * (n - 1.0))).sqrt())
}

/// Delete-one jackknife standard error of a smooth function of per-sample
/// vectors. `stat` receives the column means.
pub fn jackknife_se(
    samples: &[Vec<Complex64>],
    stat: impl Fn(&[Complex64]) -> Complex64,
) -> f64 {
    let n = samples.len();
    if n < 2 {
        return f64::NAN;
    }
    let k = samples[0].len();
    let mut total = vec![Complex64::new(0.0, 0.0); k];
    for s in samples {
        for (t, v) in total.iter_mut().zip(s) {
            *t += v;
        }
    }
    let leave_out: Vec<Complex64> = samples
        .iter()
        .map(|s| {
            let means: Vec<Complex64> = total
                .iter()
                .zip(s)
                .map(|(t, v)| (t - v) / (n - 1) as f64)
                .collect();
            stat(&means)
        })
        .collect();
    let mean: Complex64 = leave_out.iter().sum::<Complex64>() / n as f64;
    let ss: f64 = leave_out.iter().map(|x| (x - mean).norm_sqr()).sum();
    ((n - 1) as f64 / n as f64 * ss).sqrt()
}

/// Ordinary least squares `y = a + b x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        intercept: my - slope * mx,
        slope,
        r_squared,
    })
}

/// Bootstrap replicates of `stat` over resamples (with replacement) of
/// `data`.
pub fn bootstrap<T: Clone>(
    data: &[T],
    replicates: usize,
    seed: u64,
    stat: impl Fn(&[T]) -> f64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = Vec::with_capacity(data.len());
    (0..replicates)
        .map(|_| {
            buf.clear();
            buf.extend((0..data.len()).map(|_| data[rng.random_range(0..data.len())].clone()));
            stat(&buf)
        })
        .collect()
}

/// Empirical quantile (linear interpolation) of unsorted values.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Total-variation distance between two distributions on the same index set.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
