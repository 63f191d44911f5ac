//! Torus, coarse lattice and space-time lattice geometry.
//!
//! Vertices of the torus `{-N..N}^d` are stored by their dense index
//! coordinates `0..2N` on every axis; the centered coordinate is
//! `index - N`. The edge `v*d + k` joins `v` to `v + e_k` (mod `2N+1`), so
//! the base vertex of every edge is the lower endpoint along its axis.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest vertex/edge count accepted; indices are stored as `u32` in the
/// hot loops.
pub const MAX_INDEX: usize = u32::MAX as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGeometry {
    dim: usize,
    half_side: usize,
    side: usize,
    vertices: usize,
}

impl TorusGeometry {
    pub fn new(dim: usize, half_side: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        let side = half_side
            .checked_mul(2)
            .and_then(|s| s.checked_add(1))
            .ok_or(Error::IndexOverflow { dim, side: usize::MAX })?;
        let vertices = u32::try_from(dim)
            .ok()
            .and_then(|d| side.checked_pow(d))
            .ok_or(Error::IndexOverflow { dim, side })?;
        let edges = vertices
            .checked_mul(dim)
            .ok_or(Error::IndexOverflow { dim, side })?;
        if edges > MAX_INDEX {
            return Err(Error::IndexOverflow { dim, side });
        }
        Ok(Self {
            dim,
            half_side,
            side,
            vertices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_side(&self) -> usize {
        self.half_side
    }

    /// Number of vertices per axis, `2N + 1`.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.vertices * self.dim
    }

    /// Dense coordinates of `v`, each in `0..side`.
    pub fn coords(&self, mut v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            out.push(v % self.side);
            v /= self.side;
        }
        out
    }

    /// Centered coordinates of `v`, each in `-N..=N`.
    pub fn centered(&self, v: usize) -> Vec<i64> {
        self.coords(v)
            .into_iter()
            .map(|c| c as i64 - self.half_side as i64)
            .collect()
    }

    pub fn vertex_at(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dim);
        coords
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * self.side + c % self.side)
    }

    /// Vertex at centered coordinates, wrapping around the torus.
    pub fn vertex_at_centered(&self, coords: &[i64]) -> usize {
        let side = self.side as i64;
        let dense: Vec<usize> = coords
            .iter()
            .map(|&c| (c + self.half_side as i64).rem_euclid(side) as usize)
            .collect();
        self.vertex_at(&dense)
    }

    /// The vertex with all centered coordinates zero.
    pub fn origin(&self) -> usize {
        self.vertex_at(&vec![self.half_side; self.dim])
    }

    pub fn shift(&self, v: usize, axis: usize, delta: i64) -> usize {
        let stride = self.side.pow(axis as u32);
        let c = (v / stride) % self.side;
        let nc = (c as i64 + delta).rem_euclid(self.side as i64) as usize;
        v - c * stride + nc * stride
    }

    pub fn edge(&self, base: usize, axis: usize) -> usize {
        base * self.dim + axis
    }

    pub fn edge_base(&self, e: usize) -> usize {
        e / self.dim
    }

    pub fn edge_axis(&self, e: usize) -> usize {
        e % self.dim
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let base = self.edge_base(e);
        (base, self.shift(base, self.edge_axis(e), 1))
    }

    /// The `2d` edges incident to `v` (fewer distinct ones when `side < 3`).
    pub fn incident_edges(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.dim);
        for k in 0..self.dim {
            out.push(self.edge(v, k));
            out.push(self.edge(self.shift(v, k, -1), k));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Minimal signed displacement from `a` to `b` along one axis (dense
    /// coordinates).
    pub fn axis_delta(&self, a: usize, b: usize) -> i64 {
        wrap_delta(a, b, self.side)
    }

    pub fn linf_distance(&self, u: usize, v: usize) -> usize {
        self.coords(u)
            .iter()
            .zip(self.coords(v))
            .map(|(&a, b)| self.axis_delta(a, b).unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Vertices at L∞ distance at most `radius` from `center`, sorted.
    pub fn ball(&self, center: usize, radius: usize) -> Vec<usize> {
        let c = self.coords(center);
        let r = radius as i64;
        let width = (2 * radius + 1).min(self.side);
        let mut out = Vec::with_capacity(width.pow(self.dim as u32));
        let mut offset = vec![-r; self.dim];
        loop {
            let coords: Vec<usize> = c
                .iter()
                .zip(&offset)
                .map(|(&ci, &o)| (ci as i64 + o).rem_euclid(self.side as i64) as usize)
                .collect();
            out.push(self.vertex_at(&coords));
            let mut k = 0;
            loop {
                if k == self.dim {
                    out.sort_unstable();
                    out.dedup();
                    return out;
                }
                offset[k] += 1;
                if offset[k] > r {
                    offset[k] = -r;
                    k += 1;
                } else {
                    break;
                }
            }
        }
    }

    /// Edges whose base vertex lies in the ball `B_radius(center)`.
    pub fn edge_block(&self, center: usize, radius: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .ball(center, radius)
            .into_iter()
            .flat_map(|v| (0..self.dim).map(move |k| v * self.dim + k))
            .collect();
        out.sort_unstable();
        out
    }

    /// Edges with both endpoints in `vertices` (which must be sorted).
    pub fn internal_edges(&self, vertices: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        for &v in vertices {
            for k in 0..self.dim {
                let w = self.shift(v, k, 1);
                if vertices.binary_search(&w).is_ok() {
                    out.push(self.edge(v, k));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Edges with at least one endpoint in `vertices` (sorted input).
    pub fn touching_edges(&self, vertices: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = vertices
            .iter()
            .flat_map(|&v| self.incident_edges(v))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The edge window `Λ_n`: edges with at least one endpoint at L∞
    /// distance `<= n` from the origin.
    pub fn edge_window(&self, n: usize) -> Vec<usize> {
        self.touching_edges(&self.ball(self.origin(), n))
    }

    /// Vertex set of the edges in `edges`, sorted.
    pub fn vertices_of(&self, edges: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(edges.len() * 2);
        for &e in edges {
            let (a, b) = self.endpoints(e);
            out.push(a);
            out.push(b);
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn wrap_delta(a: usize, b: usize, side: usize) -> i64 {
    let side = side as i64;
    let mut d = (b as i64 - a as i64).rem_euclid(side);
    if d > side / 2 {
        d -= side;
    }
    d
}

/// The coarse lattice `((2L+1)Z)^d ∩ T_N` with its block structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseLattice {
    torus: TorusGeometry,
    scale: usize,
    per_axis: usize,
    sites: usize,
    star_factor: f64,
}

impl CoarseLattice {
    pub fn new(torus: TorusGeometry, scale: usize) -> Result<Self> {
        let block = 2 * scale + 1;
        if torus.side() % block != 0 {
            return Err(Error::Divisibility {
                side: torus.side(),
                block,
            });
        }
        let per_axis = torus.side() / block;
        Ok(Self {
            torus,
            scale,
            per_axis,
            sites: per_axis.pow(torus.dim() as u32),
            star_factor: std::f64::consts::SQRT_2,
        })
    }

    /// Override the star-connectivity threshold, in units of `2L+1`.
    pub fn with_star_factor(mut self, factor: f64) -> Self {
        self.star_factor = factor;
        self
    }

    pub fn torus(&self) -> &TorusGeometry {
        &self.torus
    }

    pub fn dim(&self) -> usize {
        self.torus.dim()
    }

    /// The coarse scale `L`.
    pub fn scale(&self) -> usize {
        self.scale
    }

    /// Side of a block, `2L + 1`.
    pub fn block_side(&self) -> usize {
        2 * self.scale + 1
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn site_count(&self) -> usize {
        self.sites
    }

    pub fn star_factor(&self) -> f64 {
        self.star_factor
    }

    pub fn site_coords(&self, mut x: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim());
        for _ in 0..self.dim() {
            out.push(x % self.per_axis);
            x /= self.per_axis;
        }
        out
    }

    pub fn site_at(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * self.per_axis + c % self.per_axis)
    }

    /// Torus vertex at the centre of block `x`.
    pub fn center(&self, x: usize) -> usize {
        let coords: Vec<usize> = self
            .site_coords(x)
            .into_iter()
            .map(|k| k * self.block_side() + self.scale)
            .collect();
        self.torus.vertex_at(&coords)
    }

    /// The coarse site whose block `B_L(x)` contains vertex `v`.
    pub fn site_of_vertex(&self, v: usize) -> usize {
        let coords: Vec<usize> = self
            .torus
            .coords(v)
            .into_iter()
            .map(|c| c / self.block_side())
            .collect();
        self.site_at(&coords)
    }

    /// `B_L(x)`.
    pub fn block_vertices(&self, x: usize) -> Vec<usize> {
        self.torus.ball(self.center(x), self.scale)
    }

    /// `E_L(x)`.
    pub fn block_edges(&self, x: usize) -> Vec<usize> {
        self.torus.edge_block(self.center(x), self.scale)
    }

    /// Edge block of arbitrary radius around the centre of `x`.
    pub fn edge_block(&self, x: usize, radius: usize) -> Vec<usize> {
        self.torus.edge_block(self.center(x), radius)
    }

    /// Minimal coarse displacement from `x` to `y`, per axis.
    pub fn displacement(&self, x: usize, y: usize) -> Vec<i64> {
        self.site_coords(x)
            .into_iter()
            .zip(self.site_coords(y))
            .map(|(a, b)| wrap_delta(a, b, self.per_axis))
            .collect()
    }

    pub fn translate(&self, x: usize, shift: &[usize]) -> usize {
        let coords: Vec<usize> = self
            .site_coords(x)
            .into_iter()
            .zip(shift)
            .map(|(c, s)| (c + s) % self.per_axis)
            .collect();
        self.site_at(&coords)
    }

    /// Distinct nearest neighbours of `x` (distance `2L+1` on the torus).
    pub fn neighbors(&self, x: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.dim());
        let coords = self.site_coords(x);
        for k in 0..self.dim() {
            for delta in [1, self.per_axis.saturating_sub(1)] {
                let mut c = coords.clone();
                c[k] = (c[k] + delta) % self.per_axis.max(1);
                let y = self.site_at(&c);
                if y != x {
                    out.push(y);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Sites within Euclidean distance `star_factor · (2L+1)` of `x`,
    /// excluding `x`.
    pub fn star_neighbors(&self, x: usize) -> Vec<usize> {
        let limit = self.star_factor * self.star_factor + 1e-9;
        let reach = self.star_factor.floor() as i64;
        let coords = self.site_coords(x);
        let mut out = Vec::new();
        let mut offset = vec![-reach; self.dim()];
        loop {
            let norm: i64 = offset.iter().map(|o| o * o).sum();
            if norm > 0 && (norm as f64) <= limit {
                let c: Vec<usize> = coords
                    .iter()
                    .zip(&offset)
                    .map(|(&ci, &o)| (ci as i64 + o).rem_euclid(self.per_axis as i64) as usize)
                    .collect();
                let y = self.site_at(&c);
                if y != x {
                    out.push(y);
                }
            }
            let mut k = 0;
            loop {
                if k == self.dim() {
                    out.sort_unstable();
                    out.dedup();
                    return out;
                }
                offset[k] += 1;
                if offset[k] > reach {
                    offset[k] = -reach;
                    k += 1;
                } else {
                    break;
                }
            }
        }
    }

    pub fn adjacent(&self, x: usize, y: usize) -> bool {
        x != y && self.neighbors(x).contains(&y)
    }

    pub fn star_adjacent(&self, x: usize, y: usize) -> bool {
        x != y && self.star_neighbors(x).contains(&y)
    }

    /// Whether `sites` (sorted, nonempty) is connected in the coarse graph.
    pub fn is_connected(&self, sites: &[usize]) -> bool {
        let Some(&start) = sites.first() else {
            return false;
        };
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for y in self.neighbors(x) {
                if sites.binary_search(&y).is_ok() && seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.len() == sites.len()
    }

    /// Connected components of `sites` (sorted) in the coarse graph.
    pub fn components(&self, sites: &[usize]) -> Vec<Vec<usize>> {
        let mut seen: HashSet<usize> = HashSet::new();
        let mut out = Vec::new();
        for &s in sites {
            if !seen.insert(s) {
                continue;
            }
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for y in self.neighbors(x) {
                    if sites.binary_search(&y).is_ok() && seen.insert(y) {
                        comp.push(y);
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Coarse-grained space-time `T_N^L × K·Z_+`, materialised up to a finite
/// number of layers. Layer `t` covers backward times `[tK, (t+1)K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeLattice {
    base: CoarseLattice,
    time_block: f64,
    layers: usize,
}

impl SpaceTimeLattice {
    pub fn new(base: CoarseLattice, time_block: f64, layers: usize) -> Result<Self> {
        if !(time_block > 0.0) || layers == 0 {
            return Err(Error::InvalidArgument(
                "space-time lattice needs K > 0 and at least one layer".into(),
            ));
        }
        Ok(Self {
            base,
            time_block,
            layers,
        })
    }

    pub fn base(&self) -> &CoarseLattice {
        &self.base
    }

    pub fn time_block(&self) -> f64 {
        self.time_block
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn site_count(&self) -> usize {
        self.layers * self.base.site_count()
    }

    pub fn site(&self, spatial: usize, layer: usize) -> usize {
        layer * self.base.site_count() + spatial
    }

    pub fn spatial(&self, s: usize) -> usize {
        s % self.base.site_count()
    }

    pub fn layer(&self, s: usize) -> usize {
        s / self.base.site_count()
    }

    /// Backward time at which the box of site `s` starts.
    pub fn time_start(&self, s: usize) -> f64 {
        self.layer(s) as f64 * self.time_block
    }

    /// Backward time covered by the materialised boxes.
    pub fn depth(&self) -> f64 {
        self.layers as f64 * self.time_block
    }

    pub fn neighbors(&self, s: usize) -> Vec<usize> {
        let (x, t) = (self.spatial(s), self.layer(s));
        let mut out: Vec<usize> = self
            .base
            .neighbors(x)
            .into_iter()
            .map(|y| self.site(y, t))
            .collect();
        if t > 0 {
            out.push(self.site(x, t - 1));
        }
        if t + 1 < self.layers {
            out.push(self.site(x, t + 1));
        }
        out
    }

    /// Star neighbours: spatial/temporal offsets in `{-1,0,1}` whose
    /// squared Euclidean norm (time measured in layers, space in blocks)
    /// is within the coarse lattice's star threshold.
    pub fn star_neighbors(&self, s: usize) -> Vec<usize> {
        let (x, t) = (self.spatial(s), self.layer(s));
        let limit = self.base.star_factor() * self.base.star_factor() + 1e-9;
        let coords = self.base.site_coords(x);
        let n = self.base.per_axis() as i64;
        let dim = self.base.dim();
        let mut out = Vec::new();
        let mut offset = vec![-1i64; dim + 1];
        loop {
            let norm: i64 = offset.iter().map(|o| o * o).sum();
            let nt = t as i64 + offset[dim];
            if norm > 0 && (norm as f64) <= limit && nt >= 0 && (nt as usize) < self.layers {
                let c: Vec<usize> = coords
                    .iter()
                    .zip(&offset)
                    .map(|(&ci, &o)| (ci as i64 + o).rem_euclid(n) as usize)
                    .collect();
                let y = self.site(self.base.site_at(&c), nt as usize);
                if y != s {
                    out.push(y);
                }
            }
            let mut k = 0;
            loop {
                if k == dim + 1 {
                    out.sort_unstable();
                    out.dedup();
                    return out;
                }
                offset[k] += 1;
                if offset[k] > 1 {
                    offset[k] = -1;
                    k += 1;
                } else {
                    break;
                }
            }
        }
    }

    /// Sites at graph distance at most `radius` from `s` (including `s`).
    pub fn ball(&self, s: usize, radius: usize) -> Vec<usize> {
        let mut dist = std::collections::HashMap::from([(s, 0usize)]);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            if du == radius {
                continue;
            }
            for v in self.neighbors(u) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(du + 1);
                    queue.push_back(v);
                }
            }
        }
        let mut out: Vec<usize> = dist.into_keys().collect();
        out.sort_unstable();
        out
    }

    /// Whether `sites` (sorted, nonempty) is connected in the space-time graph.
    pub fn is_connected(&self, sites: &[usize]) -> bool {
        let Some(&start) = sites.first() else {
            return false;
        };
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for y in self.neighbors(x) {
                if sites.binary_search(&y).is_ok() && seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.len() == sites.len()
    }
}

/// A polymer: nonempty connected set of coarse sites, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Polymer(Vec<usize>);

impl Polymer {
    pub fn new(mut sites: Vec<usize>, lattice: &CoarseLattice) -> Result<Self> {
        sites.sort_unstable();
        sites.dedup();
        if sites.is_empty() {
            return Err(Error::InvalidArgument("empty polymer".into()));
        }
        if sites.iter().any(|&s| s >= lattice.site_count()) {
            return Err(Error::InvalidArgument("polymer site out of range".into()));
        }
        if !lattice.is_connected(&sites) {
            return Err(Error::InvalidArgument(format!(
                "polymer {sites:?} is not connected"
            )));
        }
        Ok(Self(sites))
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn intersects(&self, other: &Polymer) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Hard-core compatibility: two polymers are compatible iff their union
    /// is not connected, i.e. they are disjoint and not adjacent.
    pub fn compatible_with(&self, other: &Polymer, lattice: &CoarseLattice) -> bool {
        if self.intersects(other) {
            return false;
        }
        !self
            .0
            .iter()
            .any(|&x| lattice.neighbors(x).iter().any(|y| other.contains(*y)))
    }

    /// Translate every site by the coarse vector `shift`.
    pub fn translate(&self, shift: &[usize], lattice: &CoarseLattice) -> Polymer {
        let mut sites: Vec<usize> = self.0.iter().map(|&x| lattice.translate(x, shift)).collect();
        sites.sort_unstable();
        Polymer(sites)
    }

    /// Canonical representative of the translation class: the
    /// lexicographically smallest translate.
    pub fn shape(&self, lattice: &CoarseLattice) -> Polymer {
        let dim = lattice.dim();
        let n = lattice.per_axis();
        let mut best = self.clone();
        let mut shift = vec![0usize; dim];
        loop {
            let t = self.translate(&shift, lattice);
            if t < best {
                best = t;
            }
            let mut k = 0;
            loop {
                if k == dim {
                    return best;
                }
                shift[k] += 1;
                if shift[k] == n {
                    shift[k] = 0;
                    k += 1;
                } else {
                    break;
                }
            }
        }
    }
}

/// Default cap on the number of enumerated polymers.
pub const DEFAULT_POLYMER_CAP: usize = 1_000_000;

/// All polymers containing `x` with at most `max_size` sites, ordered by
/// size and then lexicographically.
pub fn enumerate_polymers(
    lattice: &CoarseLattice,
    x: usize,
    max_size: usize,
    cap: usize,
) -> Result<Vec<Polymer>> {
    if max_size == 0 {
        return Err(Error::InvalidArgument("max_size must be >= 1".into()));
    }
    if x >= lattice.site_count() {
        return Err(Error::InvalidArgument(format!("site {x} out of range")));
    }
    let mut out = vec![Polymer(vec![x])];
    let mut frontier: Vec<Vec<usize>> = vec![vec![x]];
    for _ in 1..max_size {
        let mut next: HashSet<Vec<usize>> = HashSet::new();
        for poly in &frontier {
            for &s in poly {
                for y in lattice.neighbors(s) {
                    if poly.binary_search(&y).is_ok() {
                        continue;
                    }
                    let mut grown = poly.clone();
                    let pos = grown.binary_search(&y).unwrap_err();
                    grown.insert(pos, y);
                    next.insert(grown);
                }
            }
            if out.len() + next.len() > cap {
                return Err(Error::CapExceeded {
                    what: "polymer enumeration",
                    needed: out.len() + next.len(),
                    cap,
                });
            }
        }
        if next.is_empty() {
            break;
        }
        let mut level: Vec<Vec<usize>> = next.into_iter().collect();
        level.sort_unstable();
        out.extend(level.iter().cloned().map(Polymer));
        frontier = level;
    }
    Ok(out)
}

/// Every polymer of the lattice with at most `max_size` sites.
pub fn enumerate_all_polymers(
    lattice: &CoarseLattice,
    max_size: usize,
    cap: usize,
) -> Result<Vec<Polymer>> {
    let mut all: HashSet<Polymer> = HashSet::new();
    for x in 0..lattice.site_count() {
        for p in enumerate_polymers(lattice, x, max_size, cap)? {
            all.insert(p);
        }
        if all.len() > cap {
            return Err(Error::CapExceeded {
                what: "polymer enumeration",
                needed: all.len(),
                cap,
            });
        }
    }
    let mut out: Vec<Polymer> = all.into_iter().collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// A constant `c` with `#{polymers of size k containing x} <= c^k`.
///
/// Uses the lattice-animal bound `(e·Δ)^k` with `Δ` the maximal coarse
/// degree, then checks it against explicit counts for `k <= check_up_to`.
pub fn growth_constant_bound(lattice: &CoarseLattice, check_up_to: usize) -> Result<f64> {
    let degree = (0..lattice.site_count())
        .map(|x| lattice.neighbors(x).len())
        .max()
        .unwrap_or(0)
        .max(1);
    let bound = std::f64::consts::E * degree as f64;
    if check_up_to > 0 {
        let polys = enumerate_polymers(lattice, 0, check_up_to, DEFAULT_POLYMER_CAP)?;
        for k in 1..=check_up_to {
            let count = polys.iter().filter(|p| p.len() == k).count();
            if count as f64 > bound.powi(k as i32) {
                return Err(Error::InvalidArgument(format!(
                    "growth bound {bound} violated at size {k} ({count} polymers)"
                )));
            }
        }
    }
    Ok(bound)
}
