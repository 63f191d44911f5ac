use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lattice::{CoarseLattice, Polymer};
use crate::{Error, Result};

/// Largest `|Γ|` accepted by [`PolymerModel::partition_exact`].
pub const EXACT_PARTITION_CAP: usize = 20;

/// A finite polymer gas: weights and a symmetric interaction
/// `δ: Γ × Γ → [−1, 1]`, with `δ(γ, γ) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolymerModel {
    weights: Vec<Complex64>,
    /// Row-major `|Γ| × |Γ|`.
    delta: Vec<f64>,
    /// `|γ|` of each polymer (1 for abstract models unless given).
    sizes: Vec<usize>,
}

impl PolymerModel {
    pub fn new(weights: Vec<Complex64>, delta: Vec<Vec<f64>>) -> Result<Self> {
        let n = weights.len();
        if delta.len() != n || delta.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("interaction matrix shape".into()));
        }
        for i in 0..n {
            if delta[i][i] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "polymer {i} must be incompatible with itself"
                )));
            }
            for j in 0..n {
                let d = delta[i][j];
                if d != delta[j][i] || !(-1.0..=1.0).contains(&d) {
                    return Err(Error::InvalidArgument(format!(
                        "interaction ({i}, {j}) must be symmetric and in [-1, 1]"
                    )));
                }
            }
        }
        Ok(Self {
            weights,
            delta: delta.into_iter().flatten().collect(),
            sizes: vec![1; n],
        })
    }

    /// Hard-core model from an incompatibility predicate.
    pub fn hard_core(weights: Vec<Complex64>, incompatible: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let n = weights.len();
        let delta = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j || incompatible(i, j) { 0.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        Self::new(weights, delta)
    }

    /// Lattice polymers with `δ = 0` iff the union is connected.
    pub fn from_polymers(lattice: &CoarseLattice, polymers: &[Polymer], weights: Vec<Complex64>) -> Result<Self> {
        if polymers.len() != weights.len() {
            return Err(Error::InvalidArgument("one weight per polymer".into()));
        }
        let mut m = Self::hard_core(weights, |i, j| !polymers[i].compatible_with(&polymers[j], lattice))?;
        m.sizes = polymers.iter().map(Polymer::len).collect();
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> Complex64 {
        self.weights[i]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn delta(&self, i: usize, j: usize) -> f64 {
        self.delta[i * self.len() + j]
    }

    /// Same interaction, new weights.
    pub fn with_weights(&self, weights: Vec<Complex64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::InvalidArgument("one weight per polymer".into()));
        }
        Ok(Self {
            weights,
            delta: self.delta.clone(),
            sizes: self.sizes.clone(),
        })
    }

    /// `|w|` in place of `w`.
    pub fn absolute(&self) -> Self {
        Self {
            weights: self.weights.iter().map(|w| Complex64::new(w.norm(), 0.0)).collect(),
            delta: self.delta.clone(),
            sizes: self.sizes.clone(),
        }
    }

    /// `Z = Σ_H ∏_{γ∈H} w(γ) ∏_{γ≠γ'∈H} δ(γ, γ')` by direct summation.
    pub fn partition_exact(&self) -> Result<Complex64> {
        let n = self.len();
        if n > EXACT_PARTITION_CAP {
            return Err(Error::CapExceeded {
                what: "polymer partition function",
                needed: n,
                cap: EXACT_PARTITION_CAP,
            });
        }
        let mut chosen = Vec::with_capacity(n);
        Ok(self.sum_from(0, Complex64::new(1.0, 0.0), &mut chosen))
    }

    fn sum_from(&self, i: usize, product: Complex64, chosen: &mut Vec<usize>) -> Complex64 {
        if i == self.len() {
            return product;
        }
        let skip = self.sum_from(i + 1, product, chosen);
        let factor: f64 = chosen.iter().map(|&j| self.delta(i, j)).product();
        if factor == 0.0 {
            return skip;
        }
        chosen.push(i);
        let take = self.sum_from(i + 1, product * self.weights[i] * factor, chosen);
        chosen.pop();
        skip + take
    }
}
