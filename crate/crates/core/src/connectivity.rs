//! Same-component queries over a mutable set of open edges.
//!
//! [`ConnectivityState`] keeps a union-find forest that is exact while edges
//! are only opened. Closing an open edge marks the forest stale and the next
//! query rebuilds it from the open edges. [`VertexBox`] answers the cluster
//! geometry questions (spanning, L∞ diameter) asked of good boxes.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::lattice::TorusGeometry;
use crate::rc::config::{UnionFind, Wiring};
use crate::{Error, Region, Result};

/// Marker for nodes and edges with no ambient counterpart.
pub const NO_AMBIENT: usize = usize::MAX;

/// Static multigraph on which edges are switched open and closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    nodes: usize,
    endpoints: Vec<(u32, u32)>,
    offsets: Vec<u32>,
    incidence: Vec<(u32, u32)>,
    ambient_vertex: Vec<usize>,
    ambient_edge: Vec<usize>,
}

impl Graph {
    fn build(nodes: usize, endpoints: Vec<(u32, u32)>, ambient_vertex: Vec<usize>, ambient_edge: Vec<usize>) -> Self {
        let mut degree = vec![0u32; nodes + 1];
        for &(a, b) in &endpoints {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = vec![0u32; nodes + 1];
        for v in 0..nodes {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut incidence = vec![(0, 0); endpoints.len() * 2];
        for (e, &(a, b)) in endpoints.iter().enumerate() {
            incidence[fill[a as usize] as usize] = (e as u32, b);
            fill[a as usize] += 1;
            incidence[fill[b as usize] as usize] = (e as u32, a);
            fill[b as usize] += 1;
        }
        Self {
            nodes,
            endpoints,
            offsets,
            incidence,
            ambient_vertex,
            ambient_edge,
        }
    }

    /// The whole torus; node and edge indices equal ambient indices.
    pub fn torus(torus: &TorusGeometry) -> Self {
        let endpoints = (0..torus.edge_count())
            .map(|e| {
                let (a, b) = torus.endpoints(e);
                (a as u32, b as u32)
            })
            .collect();
        Self::build(
            torus.vertex_count(),
            endpoints,
            (0..torus.vertex_count()).collect(),
            (0..torus.edge_count()).collect(),
        )
    }

    /// Region edges first (same local indices as the region), then one
    /// extra edge per wiring pair of each boundary rule, in order.
    pub fn region(region: &Region, wirings: &[&Wiring]) -> Self {
        let ghost = wirings.iter().any(|w| w.ghost);
        let nv = region.vertices().len();
        let nodes = nv + usize::from(ghost);
        let mut endpoints = region.local_endpoints().to_vec();
        let mut ambient_edge = region.edges().to_vec();
        for w in wirings {
            endpoints.extend_from_slice(&w.pairs);
            ambient_edge.extend(std::iter::repeat_n(NO_AMBIENT, w.pairs.len()));
        }
        let mut ambient_vertex = region.vertices().to_vec();
        if ghost {
            ambient_vertex.push(NO_AMBIENT);
        }
        Self::build(nodes, endpoints, ambient_vertex, ambient_edge)
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let (a, b) = self.endpoints[e];
        (a as usize, b as usize)
    }

    /// `(edge, other endpoint)` pairs at `v`.
    pub fn incident(&self, v: usize) -> &[(u32, u32)] {
        &self.incidence[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn ambient_vertex(&self, v: usize) -> usize {
        self.ambient_vertex[v]
    }

    pub fn ambient_edge(&self, e: usize) -> usize {
        self.ambient_edge[e]
    }
}

/// Open-edge set over a [`Graph`] with lazily rebuilt union-find.
#[derive(Debug, Clone)]
pub struct ConnectivityState {
    graph: Arc<Graph>,
    open: Vec<bool>,
    uf: UnionFind,
    stale: bool,
    version: u64,
    seen: Vec<u32>,
    stamp: u32,
    queue: VecDeque<u32>,
}

impl ConnectivityState {
    pub fn new(graph: Arc<Graph>) -> Self {
        let n = graph.node_count();
        let m = graph.edge_count();
        Self {
            uf: UnionFind::new(n),
            open: vec![false; m],
            stale: false,
            version: 0,
            seen: vec![0; n],
            stamp: 0,
            queue: VecDeque::new(),
            graph,
        }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn is_open(&self, e: usize) -> bool {
        self.open[e]
    }

    pub fn open_edges(&self) -> &[bool] {
        &self.open
    }

    pub fn set_edge(&mut self, e: usize, state: bool) {
        if self.open[e] == state {
            return;
        }
        self.open[e] = state;
        self.version += 1;
        if state {
            if !self.stale {
                let (a, b) = self.graph.endpoints(e);
                self.uf.union(a, b);
            }
        } else {
            self.stale = true;
        }
    }

    /// Set every edge state at once.
    pub fn assign(&mut self, states: impl IntoIterator<Item = bool>) {
        for (o, s) in self.open.iter_mut().zip(states) {
            *o = s;
        }
        self.version += 1;
        self.stale = true;
    }

    fn refresh(&mut self) {
        if !self.stale {
            return;
        }
        self.uf.reset();
        for (e, &o) in self.open.iter().enumerate() {
            if o {
                let (a, b) = self.graph.endpoints(e);
                self.uf.union(a, b);
            }
        }
        self.stale = false;
    }

    pub fn connected(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return true;
        }
        self.refresh();
        self.uf.find(i) == self.uf.find(j)
    }

    /// Component representative of `v`.
    pub fn root(&mut self, v: usize) -> usize {
        self.refresh();
        self.uf.find(v)
    }

    /// Whether the endpoints of `e` are joined by open edges other than `e`.
    pub fn connected_without(&mut self, e: usize) -> bool {
        let (i, j) = self.graph.endpoints(e);
        if !self.open[e] || i == j {
            return self.connected(i, j);
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen.fill(0);
            self.stamp = 1;
        }
        let stamp = self.stamp;
        self.queue.clear();
        self.queue.push_back(i as u32);
        self.seen[i] = stamp;
        while let Some(v) = self.queue.pop_front() {
            for &(f, w) in self.graph.incident(v as usize) {
                if f as usize == e || !self.open[f as usize] || self.seen[w as usize] == stamp {
                    continue;
                }
                if w as usize == j {
                    return true;
                }
                self.seen[w as usize] = stamp;
                self.queue.push_back(w);
            }
        }
        false
    }

    /// Number of components among the first `n` nodes.
    pub fn component_count(&mut self, n: usize) -> usize {
        self.refresh();
        let mut roots: Vec<usize> = (0..n).map(|v| self.uf.find(v)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

/// Axis-aligned vertex box `B_R(center)` of a torus with its internal edges.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexBox {
    torus: TorusGeometry,
    radius: usize,
    vertices: Vec<usize>,
    offsets: Vec<Vec<i64>>,
    edges: Vec<(usize, u32, u32)>,
}

/// Cluster geometry of a configuration restricted to a box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxClusters {
    /// Some cluster touches all `2d` faces.
    pub spans: bool,
    /// L∞ diameters of the clusters, largest first.
    pub diameters: Vec<usize>,
}

impl BoxClusters {
    pub fn max_diameter(&self) -> usize {
        self.diameters.first().copied().unwrap_or(0)
    }

    pub fn count_at_least(&self, threshold: usize) -> usize {
        self.diameters.iter().take_while(|&&d| d >= threshold).count()
    }
}

impl VertexBox {
    pub fn new(torus: TorusGeometry, center: usize, radius: usize) -> Result<Self> {
        if 2 * radius + 1 > torus.side() {
            return Err(Error::WindowTooSmall(format!(
                "box of radius {radius} does not fit in a torus of side {}",
                torus.side()
            )));
        }
        let vertices = torus.ball(center, radius);
        let c = torus.coords(center);
        let offsets = vertices
            .iter()
            .map(|&v| {
                c.iter()
                    .zip(torus.coords(v))
                    .map(|(&a, b)| torus.axis_delta(a, b))
                    .collect()
            })
            .collect();
        let local = |v: usize| vertices.binary_search(&v).unwrap() as u32;
        let edges = torus
            .internal_edges(&vertices)
            .into_iter()
            .map(|e| {
                let (a, b) = torus.endpoints(e);
                (e, local(a), local(b))
            })
            .collect();
        Ok(Self {
            torus,
            radius,
            vertices,
            offsets,
            edges,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Ambient indices of the internal edges.
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().map(|&(e, _, _)| e)
    }

    /// Clusters of the open internal edges; `open` is queried by ambient edge.
    pub fn clusters(&self, open: impl Fn(usize) -> bool) -> BoxClusters {
        let n = self.vertices.len();
        let mut uf = UnionFind::new(n);
        for &(e, a, b) in &self.edges {
            if open(e) {
                uf.union(a as usize, b as usize);
            }
        }
        let d = self.torus.dim();
        let r = self.radius as i64;
        let mut lo = vec![vec![i64::MAX; d]; n];
        let mut hi = vec![vec![i64::MIN; d]; n];
        for v in 0..n {
            let root = uf.find(v);
            for a in 0..d {
                lo[root][a] = lo[root][a].min(self.offsets[v][a]);
                hi[root][a] = hi[root][a].max(self.offsets[v][a]);
            }
        }
        let mut spans = false;
        let mut diameters = Vec::new();
        for v in 0..n {
            if uf.find(v) != v {
                continue;
            }
            let diam = (0..d).map(|a| hi[v][a] - lo[v][a]).max().unwrap_or(0);
            spans |= (0..d).all(|a| lo[v][a] == -r && hi[v][a] == r);
            diameters.push(diam as usize);
        }
        diameters.sort_unstable_by(|a, b| b.cmp(a));
        BoxClusters { spans, diameters }
    }

    pub fn spans(&self, open: impl Fn(usize) -> bool) -> bool {
        self.clusters(open).spans
    }

    pub fn max_cluster_diameter(&self, open: impl Fn(usize) -> bool) -> usize {
        self.clusters(open).max_diameter()
    }
}

/// `spans_box` for a state over a graph with ambient edge labels.
pub fn spans_box(state: &ConnectivityState, b: &VertexBox) -> bool {
    b.spans(|e| ambient_open(state, e))
}

/// `max_cluster_diameter` for a state over a graph with ambient edge labels.
pub fn max_cluster_diameter(state: &ConnectivityState, b: &VertexBox) -> usize {
    b.max_cluster_diameter(|e| ambient_open(state, e))
}

fn ambient_open(state: &ConnectivityState, e: usize) -> bool {
    let g = state.graph();
    let i = g.ambient_edge.partition_point(|&a| a < e);
    g.ambient_edge.get(i) == Some(&e) && state.is_open(i)
}
