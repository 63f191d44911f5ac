use super::PolymerModel;
use crate::{Error, Result};

/// Largest tuple length accepted by [`ursell`].
pub const MAX_URSELL_ORDER: usize = 8;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `Σ_{G ⊆ K_n connected} ∏_{ij ∈ G} u_ij` for symmetric edge weights
/// given as a row-major `n × n` matrix.
///
/// With `t(S) = ∏_{i<j ∈ S} (1 + u_ij)` the total over all subgraphs of
/// `S`, the connected part `c(S)` satisfies
/// `c(S) = t(S) − Σ_{min S ∈ T ⊊ S} c(T) t(S∖T)`.
pub fn connected_graph_sum(n: usize, u: &[f64]) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let full = (1usize << n) - 1;
    let mut total = vec![1.0; 1 << n];
    for s in 1..=full {
        let top = usize::BITS as usize - 1 - s.leading_zeros() as usize;
        let rest = s & !(1 << top);
        let mut t = total[rest];
        let mut r = rest;
        while r != 0 {
            let j = r.trailing_zeros() as usize;
            t *= 1.0 + u[top * n + j];
            r &= r - 1;
        }
        total[s] = t;
    }
    let mut conn = vec![0.0; 1 << n];
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut c = total[s];
        // proper subsets T of S containing the lowest element
        let mut sub = rest;
        loop {
            let t = sub | low;
            if t != s {
                c -= conn[t] * total[s ^ t];
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        conn[s] = c;
    }
    conn[full]
}

/// `U(γ_1, …, γ_n)` for polymer indices into `model`.
pub fn ursell(tuple: &[usize], model: &PolymerModel) -> Result<f64> {
    let n = tuple.len();
    if n == 0 || n > MAX_URSELL_ORDER {
        return Err(Error::CapExceeded {
            what: "Ursell function order",
            needed: n,
            cap: MAX_URSELL_ORDER,
        });
    }
    if let Some(&i) = tuple.iter().find(|&&i| i >= model.len()) {
        return Err(Error::InvalidArgument(format!("polymer {i} out of range")));
    }
    Ok(connected_graph_sum(n, &edge_weights(tuple, model)) / factorial(n))
}

fn edge_weights(tuple: &[usize], model: &PolymerModel) -> Vec<f64> {
    let n = tuple.len();
    let mut u = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                u[i * n + j] = model.delta(tuple[i], tuple[j]) - 1.0;
            }
        }
    }
    u
}

/// Direct sum over all `2^{n(n−1)/2}` edge subsets; for testing.
pub fn ursell_bruteforce(tuple: &[usize], model: &PolymerModel) -> Result<f64> {
    let n = tuple.len();
    if n == 0 || n > 6 {
        return Err(Error::CapExceeded {
            what: "brute-force Ursell order",
            needed: n,
            cap: 6,
        });
    }
    let u = edge_weights(tuple, model);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut sum = 0.0;
    for mask in 0u64..1 << pairs.len() {
        let mut uf = crate::rc::config::UnionFind::new(n);
        let mut w = 1.0;
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                w *= u[i * n + j];
                uf.union(i, j);
            }
        }
        let root = uf.find(0);
        if (1..n).all(|v| uf.find(v) == root) {
            sum += w;
        }
    }
    Ok(sum / factorial(n))
}
