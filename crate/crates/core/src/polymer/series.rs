use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ursell::{connected_graph_sum, MAX_URSELL_ORDER};
use super::PolymerModel;
use crate::{Error, Result};

/// Default cap on the number of multisets visited while building a table.
pub const DEFAULT_CLUSTER_CAP: usize = 5_000_000;

/// One cluster: a multiset of polymers with its exact coefficient
/// `n! U(γ_1, …, γ_n) / ∏ m_i!`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTerm {
    /// Sorted polymer indices, repeated according to multiplicity.
    pub polymers: Vec<u32>,
    pub coefficient: f64,
}

/// All clusters with nonzero coefficient up to a given order, for a fixed
/// interaction. Evaluating the series for new weights only multiplies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTable {
    max_order: usize,
    polymers: usize,
    /// `by_order[n - 1]` holds the clusters of `n` polymers.
    by_order: Vec<Vec<ClusterTerm>>,
}

impl ClusterTable {
    pub fn new(model: &PolymerModel, max_order: usize) -> Result<Self> {
        Self::with_cap(model, max_order, DEFAULT_CLUSTER_CAP)
    }

    pub fn with_cap(model: &PolymerModel, max_order: usize, cap: usize) -> Result<Self> {
        if max_order == 0 || max_order > MAX_URSELL_ORDER {
            return Err(Error::CapExceeded {
                what: "cluster expansion order",
                needed: max_order,
                cap: MAX_URSELL_ORDER,
            });
        }
        let mut builder = Builder {
            model,
            cache: HashMap::new(),
            visited: 0,
            cap,
            by_order: vec![Vec::new(); max_order],
            stack: Vec::with_capacity(max_order),
        };
        builder.extend(0, max_order)?;
        Ok(Self {
            max_order,
            polymers: model.len(),
            by_order: builder.by_order,
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn polymer_count(&self) -> usize {
        self.polymers
    }

    pub fn terms(&self, order: usize) -> &[ClusterTerm] {
        &self.by_order[order - 1]
    }

    pub fn term_count(&self) -> usize {
        self.by_order.iter().map(Vec::len).sum()
    }

    /// Order-`n` contributions `Σ_{clusters of n} coef · ∏ w`.
    pub fn evaluate(&self, weights: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(weights.len(), self.polymers);
        self.by_order
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| t.polymers.iter().fold(Complex64::new(t.coefficient, 0.0), |p, &i| p * weights[i as usize]))
                    .sum()
            })
            .collect()
    }

    /// `A_n = Σ_{clusters of n} |coef| ∏ |w|`.
    pub fn absolute(&self, weights: &[Complex64]) -> Vec<f64> {
        assert_eq!(weights.len(), self.polymers);
        self.by_order
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| t.polymers.iter().fold(t.coefficient.abs(), |p, &i| p * weights[i as usize].norm()))
                    .sum()
            })
            .collect()
    }

    pub fn series(&self, weights: &[Complex64]) -> Series {
        let terms = self.evaluate(weights);
        let absolute = self.absolute(weights);
        let mut partial = Vec::with_capacity(terms.len());
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &terms {
            acc += t;
            partial.push(acc);
        }
        Series {
            terms,
            partial,
            absolute,
        }
    }
}

struct Builder<'a> {
    model: &'a PolymerModel,
    cache: HashMap<(usize, u64), f64>,
    visited: usize,
    cap: usize,
    by_order: Vec<Vec<ClusterTerm>>,
    stack: Vec<usize>,
}

impl Builder<'_> {
    fn extend(&mut self, from: usize, max_order: usize) -> Result<()> {
        for i in from..self.model.len() {
            self.stack.push(i);
            self.visited += 1;
            if self.visited > self.cap {
                return Err(Error::CapExceeded {
                    what: "cluster multisets",
                    needed: self.visited,
                    cap: self.cap,
                });
            }
            let coefficient = self.coefficient();
            if coefficient != 0.0 {
                self.by_order[self.stack.len() - 1].push(ClusterTerm {
                    polymers: self.stack.iter().map(|&k| k as u32).collect(),
                    coefficient,
                });
            }
            if self.stack.len() < max_order {
                self.extend(i, max_order)?;
            }
            self.stack.pop();
        }
        Ok(())
    }

    /// `Φ(graph) / ∏ m_i!` for the current multiset.
    fn coefficient(&mut self) -> f64 {
        let n = self.stack.len();
        let mut key = 0u64;
        let mut u = vec![0.0; n * n];
        let mut bit = 0;
        let mut soft = false;
        for i in 0..n {
            for j in i + 1..n {
                let d = self.model.delta(self.stack[i], self.stack[j]);
                u[i * n + j] = d - 1.0;
                u[j * n + i] = d - 1.0;
                if d == 0.0 {
                    key |= 1 << bit;
                } else if d != 1.0 {
                    soft = true;
                }
                bit += 1;
            }
        }
        let phi = if soft {
            connected_graph_sum(n, &u)
        } else {
            *self
                .cache
                .entry((n, key))
                .or_insert_with(|| connected_graph_sum(n, &u))
        };
        let mut multiplicity = 1.0;
        let mut run = 1;
        for k in 1..n {
            if self.stack[k] == self.stack[k - 1] {
                run += 1;
                multiplicity *= run as f64;
            } else {
                run = 1;
            }
        }
        phi / multiplicity
    }
}

/// Per-order terms and partial sums of the cluster expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub terms: Vec<Complex64>,
    pub partial: Vec<Complex64>,
    /// `A_n`, the absolute order-`n` sums.
    pub absolute: Vec<f64>,
}

impl Series {
    pub fn max_order(&self) -> usize {
        self.terms.len()
    }

    /// Partial sum through order `n`.
    pub fn sum_to(&self, n: usize) -> Complex64 {
        if n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.partial[n - 1]
        }
    }

    pub fn total(&self) -> Complex64 {
        self.partial.last().copied().unwrap_or_default()
    }

    /// Bound on `|log Z − partial sum through n|`: the enumerated `A_k`
    /// for `n < k ≤ max` plus a geometric tail beyond the last order with
    /// ratio `(A_m / A_{m−1}) · m / (m − 1)`. Infinite when that ratio is
    /// at least one.
    pub fn envelope(&self, n: usize) -> f64 {
        let enumerated: f64 = self.absolute.iter().skip(n).sum();
        enumerated + self.tail_beyond()
    }

    fn tail_beyond(&self) -> f64 {
        let m = self.max_order();
        let last = self.absolute[m - 1];
        if last == 0.0 {
            return 0.0;
        }
        if m < 2 {
            return f64::INFINITY;
        }
        let prev = self.absolute[m - 2];
        if prev == 0.0 {
            return f64::INFINITY;
        }
        let r = last / prev * m as f64 / (m - 1) as f64;
        if r >= 1.0 {
            f64::INFINITY
        } else {
            last * r / (1.0 - r)
        }
    }

    /// `order,re,im,envelope` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# series v1\norder,partial_re,partial_im,envelope\n");
        for (k, p) in self.partial.iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", k + 1, p.re, p.im, self.envelope(k + 1)));
        }
        out
    }
}

/// Partial sums of `log Z` through `max_order`.
pub fn cluster_expansion(model: &PolymerModel, max_order: usize) -> Result<Series> {
    Ok(ClusterTable::new(model, max_order)?.series(model.weights()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn single_polymer_gives_log_one_plus_w() {
        let w = 0.3;
        let m = PolymerModel::hard_core(vec![c(w)], |_, _| true).unwrap();
        let s = cluster_expansion(&m, 8).unwrap();
        for (k, t) in s.terms.iter().enumerate() {
            let n = (k + 1) as i32;
            let expected = if n % 2 == 1 { 1.0 } else { -1.0 } * w.powi(n) / n as f64;
            assert!((t.re - expected).abs() < 1e-15 && t.im == 0.0);
        }
        let exact = (1.0 + w).ln();
        for n in 1..=8 {
            assert!((s.sum_to(n).re - exact).abs() <= s.envelope(n) + 1e-15);
        }
    }

    #[test]
    fn compatible_polymers_do_not_mix() {
        let m = PolymerModel::hard_core(vec![c(0.2), c(-0.1)], |_, _| false).unwrap();
        let s = cluster_expansion(&m, 8).unwrap();
        let table = ClusterTable::new(&m, 8).unwrap();
        assert!(table.by_order.iter().flatten().all(|t| t.polymers.iter().all(|&p| p == t.polymers[0])));
        let exact = (1.2f64).ln() + (0.9f64).ln();
        assert!((s.total().re - exact).abs() < 1e-6);
    }

    #[test]
    fn zero_weights_give_zero() {
        let m = PolymerModel::hard_core(vec![c(0.0); 4], |i, j| i.abs_diff(j) == 1).unwrap();
        let s = cluster_expansion(&m, 6).unwrap();
        assert!(s.partial.iter().all(|p| p.norm() == 0.0));
        assert_eq!(s.envelope(1), 0.0);
    }

    #[test]
    fn random_small_models_match_exact_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let n = rng.random_range(1..=6);
            let weights: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01)))
                .collect();
            let bits: Vec<bool> = (0..n * n).map(|_| rng.random_bool(0.5)).collect();
            let m = PolymerModel::hard_core(weights, |i, j| bits[i.min(j) * n + i.max(j)]).unwrap();
            let s = cluster_expansion(&m, 8).unwrap();
            let z = m.partition_exact().unwrap();
            assert!((s.total().exp() - z).norm() / z.norm() < 1e-9);
            assert!((s.total() - z.ln()).norm() <= s.envelope(8) + 1e-14);
        }
    }

    #[test]
    fn cap_reports_multiset_count() {
        let m = PolymerModel::hard_core(vec![c(0.01); 30], |_, _| true).unwrap();
        assert!(matches!(ClusterTable::with_cap(&m, 8, 1000), Err(Error::CapExceeded { .. })));
        assert!(ClusterTable::new(&m, 9).is_err());
    }
}
