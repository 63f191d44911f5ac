use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lattice::TorusGeometry;
use crate::{BoundaryCondition, Error, Result};

const NONE: u32 = u32::MAX;

/// An explicit finite edge set `F` of an ambient torus, with its vertex set
/// `V_F` and local indexing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    torus: TorusGeometry,
    edges: Vec<usize>,
    position: Vec<u32>,
    vertices: Vec<usize>,
    endpoints: Vec<(u32, u32)>,
}

/// Serialized form of a region: the ambient torus and the edge indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub dim: usize,
    pub half_side: usize,
    pub edges: Vec<usize>,
}

impl Region {
    pub fn new(torus: TorusGeometry, mut edges: Vec<usize>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        if let Some(&e) = edges.iter().find(|&&e| e >= torus.edge_count()) {
            return Err(Error::InvalidArgument(format!(
                "edge {e} outside the torus ({} edges)",
                torus.edge_count()
            )));
        }
        let mut position = vec![NONE; torus.edge_count()];
        for (i, &e) in edges.iter().enumerate() {
            position[e] = i as u32;
        }
        let vertices = torus.vertices_of(&edges);
        let local = |v: usize| vertices.binary_search(&v).unwrap() as u32;
        let endpoints = edges
            .iter()
            .map(|&e| {
                let (a, b) = torus.endpoints(e);
                (local(a), local(b))
            })
            .collect();
        Ok(Self {
            torus,
            edges,
            position,
            vertices,
            endpoints,
        })
    }

    /// Every edge of the torus.
    pub fn full(torus: TorusGeometry) -> Self {
        Self::new(torus, (0..torus.edge_count()).collect()).expect("full torus is valid")
    }

    pub fn from_spec(spec: &RegionSpec) -> Result<Self> {
        Self::new(TorusGeometry::new(spec.dim, spec.half_side)?, spec.edges.clone())
    }

    pub fn spec(&self) -> RegionSpec {
        RegionSpec {
            dim: self.torus.dim(),
            half_side: self.torus.half_side(),
            edges: self.edges.clone(),
        }
    }

    pub fn torus(&self) -> &TorusGeometry {
        &self.torus
    }

    /// Ambient indices of the region's edges, sorted.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `V_F`, sorted ambient vertex indices.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Endpoints of each local edge, as local vertex indices.
    pub fn local_endpoints(&self) -> &[(u32, u32)] {
        &self.endpoints
    }

    pub fn local_index(&self, edge: usize) -> Option<usize> {
        match self.position.get(edge) {
            Some(&p) if p != NONE => Some(p as usize),
            _ => None,
        }
    }

    pub fn contains_edge(&self, edge: usize) -> bool {
        self.local_index(edge).is_some()
    }

    pub fn local_vertex(&self, v: usize) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    /// Whether every edge of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.torus == other.torus && self.edges.iter().all(|&e| other.contains_edge(e))
    }

    /// Vertices of `V_F` incident to at least one ambient edge outside `F`.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, &v)| {
                self.torus
                    .incident_edges(v)
                    .iter()
                    .any(|&e| !self.contains_edge(e))
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Boundary wiring induced by `bc`, in local vertex indices. A ghost
    /// vertex, when used, has index `vertices().len()`.
    pub fn wiring(&self, bc: &BoundaryCondition) -> Result<Wiring> {
        let ghost = self.vertices.len() as u32;
        match bc {
            BoundaryCondition::Free | BoundaryCondition::Periodic => Ok(Wiring::default()),
            BoundaryCondition::Wired => {
                let pairs: Vec<(u32, u32)> = self
                    .boundary_vertices()
                    .into_iter()
                    .map(|v| (v as u32, ghost))
                    .collect();
                Ok(Wiring {
                    ghost: !pairs.is_empty(),
                    pairs,
                })
            }
            BoundaryCondition::Explicit(eta) => {
                if let Some(&e) = eta.iter().find(|&&e| self.contains_edge(e)) {
                    return Err(Error::InvalidBoundary(format!(
                        "explicit boundary edge {e} lies inside the region"
                    )));
                }
                if let Some(&e) = eta.iter().find(|&&e| e >= self.torus.edge_count()) {
                    return Err(Error::InvalidBoundary(format!(
                        "explicit boundary edge {e} outside the torus"
                    )));
                }
                let mut uf = UnionFind::new(self.torus.vertex_count());
                for &e in eta {
                    let (a, b) = self.torus.endpoints(e);
                    uf.union(a, b);
                }
                let mut by_root: std::collections::BTreeMap<usize, Vec<u32>> =
                    std::collections::BTreeMap::new();
                for (i, &v) in self.vertices.iter().enumerate() {
                    by_root.entry(uf.find(v)).or_default().push(i as u32);
                }
                let pairs = by_root
                    .values()
                    .flat_map(|group| group.windows(2).map(|w| (w[0], w[1])))
                    .collect();
                Ok(Wiring { ghost: false, pairs })
            }
        }
    }
}

/// Local vertex pairs joined by the boundary condition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Wiring {
    pub ghost: bool,
    pub pairs: Vec<(u32, u32)>,
}

/// A `{0,1}`-valued configuration on the edges of a region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeConfiguration {
    region: Arc<Region>,
    words: Vec<u64>,
    open: usize,
}

impl EdgeConfiguration {
    pub fn empty(region: Arc<Region>) -> Self {
        let words = vec![0; region.len().div_ceil(64)];
        Self {
            region,
            words,
            open: 0,
        }
    }

    pub fn full(region: Arc<Region>) -> Self {
        let mut c = Self::empty(region);
        for i in 0..c.len() {
            c.set(i, true);
        }
        c
    }

    /// Configuration whose local edge `i` is open iff bit `i` of `mask` is set.
    pub fn from_mask(region: Arc<Region>, mask: u64) -> Self {
        let mut c = Self::empty(region);
        for i in 0..c.len().min(64) {
            if mask >> i & 1 == 1 {
                c.set(i, true);
            }
        }
        c
    }

    /// Configuration with the listed ambient edges open.
    pub fn from_open_edges(region: Arc<Region>, open: &[usize]) -> Result<Self> {
        let mut c = Self::empty(region);
        for &e in open {
            let i = c.region.local_index(e).ok_or_else(|| {
                Error::InvalidArgument(format!("edge {e} is not in the region"))
            })?;
            c.set(i, true);
        }
        Ok(c)
    }

    pub fn region(&self) -> &Arc<Region> {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.region.len()
    }

    pub fn is_empty(&self) -> bool {
        self.region.is_empty()
    }

    /// `|ω|`.
    pub fn open_count(&self) -> usize {
        self.open
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, state: bool) {
        let (w, b) = (i / 64, i % 64);
        let old = self.words[w] >> b & 1 == 1;
        if old != state {
            self.words[w] ^= 1 << b;
            if state {
                self.open += 1;
            } else {
                self.open -= 1;
            }
        }
    }

    /// State of an ambient edge; `None` if it is outside the region.
    pub fn get_edge(&self, edge: usize) -> Option<bool> {
        self.region.local_index(edge).map(|i| self.get(i))
    }

    /// Low 64 local edges as a bit mask.
    pub fn mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Ambient indices of the open edges.
    pub fn open_edges(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.get(i))
            .map(|i| self.region.edges()[i])
            .collect()
    }

    /// Edgewise `self <= other`; both must live on the same region.
    pub fn le(&self, other: &EdgeConfiguration) -> bool {
        debug_assert_eq!(self.len(), other.len());
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// Restriction to a subregion.
    pub fn restrict(&self, sub: Arc<Region>) -> Result<Self> {
        let mut out = Self::empty(sub.clone());
        for (j, &e) in sub.edges().iter().enumerate() {
            let i = self.region.local_index(e).ok_or_else(|| {
                Error::InvalidArgument(format!("edge {e} is not in the parent region"))
            })?;
            out.set(j, self.get(i));
        }
        Ok(out)
    }

    /// Bit string over local edges, `'1'` for open.
    pub fn bitstring(&self) -> String {
        (0..self.len())
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(region: Arc<Region>, bits: &str) -> Result<Self> {
        if bits.len() != region.len() {
            return Err(Error::InvalidArgument(format!(
                "bit string has {} entries, region has {} edges",
                bits.len(),
                region.len()
            )));
        }
        let mut c = Self::empty(region);
        for (i, ch) in bits.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => c.set(i, true),
                _ => return Err(Error::InvalidArgument(format!("bad bit '{ch}'"))),
            }
        }
        Ok(c)
    }
}

/// Plain union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    /// Returns true if the two sets were distinct.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }
}
