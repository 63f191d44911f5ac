//! Graphical representation of heat-bath Glauber dynamics.
//!
//! Every edge carries a rate-one Poisson clock on `(−∞, 0]` with an
//! independent uniform attached to each ring. The clocks are generated
//! backward from time 0 out of a per-edge ChaCha stream, so the schedule on
//! `[−t, 0]` is always the restriction of the schedule on `[−2t, 0]`.

use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connectivity::{ConnectivityState, Graph};
use crate::lattice::TorusGeometry;
use crate::stats::Proportion;
use crate::{BoundaryCondition, EdgeConfiguration, Error, ModelParams, Region, Result};

/// One clock ring: at `time` (in `[−t, 0]`) edge `edge` is resampled
/// with `uniform`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub edge: usize,
    pub uniform: f64,
}

/// Time-ordered events on `[−horizon, 0]`; ties are ordered by edge index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateSchedule {
    horizon: f64,
    events: Vec<Event>,
}

fn event_order(a: &Event, b: &Event) -> std::cmp::Ordering {
    a.time.total_cmp(&b.time).then(a.edge.cmp(&b.edge))
}

impl UpdateSchedule {
    /// Validates and sorts; rejects two rings of one edge at the same time.
    pub fn new(horizon: f64, mut events: Vec<Event>) -> Result<Self> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon {horizon}")));
        }
        for ev in &events {
            if !(ev.time >= -horizon && ev.time <= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "event time {} outside [-{horizon}, 0]",
                    ev.time
                )));
            }
            if !(0.0..=1.0).contains(&ev.uniform) {
                return Err(Error::InvalidArgument(format!("uniform {}", ev.uniform)));
            }
        }
        events.sort_by(event_order);
        if events
            .windows(2)
            .any(|w| w[0].time == w[1].time && w[0].edge == w[1].edge)
        {
            return Err(Error::InvalidArgument("duplicate event".into()));
        }
        Ok(Self { horizon, events })
    }

    pub fn empty(horizon: f64) -> Self {
        Self {
            horizon,
            events: Vec::new(),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Keep only the events on the given edges.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Self {
        Self {
            horizon: self.horizon,
            events: self.events.iter().filter(|ev| keep(ev.edge)).copied().collect(),
        }
    }

    /// Events on the given edges with time in `[from, to]`.
    pub fn slice(&self, from: f64, to: f64, keep: impl Fn(usize) -> bool) -> Vec<Event> {
        let lo = self.events.partition_point(|ev| ev.time < from);
        let hi = self.events.partition_point(|ev| ev.time <= to);
        self.events[lo..hi]
            .iter()
            .filter(|ev| keep(ev.edge))
            .copied()
            .collect()
    }

    /// FNV-1a over the raw event data.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(self.horizon.to_bits());
        for ev in &self.events {
            eat(ev.time.to_bits());
            eat(ev.edge as u64);
            eat(ev.uniform.to_bits());
        }
        h
    }

    /// `time,edge,uniform` rows with full round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# schedule v1 horizon={:?}\ntime,edge,uniform\n", self.horizon);
        for ev in &self.events {
            out.push_str(&format!("{:?},{},{:?}\n", ev.time, ev.edge, ev.uniform));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidArgument(format!("schedule csv: {m}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let horizon: f64 = header
            .split("horizon=")
            .nth(1)
            .and_then(|h| h.trim().parse().ok())
            .ok_or_else(|| bad("missing horizon"))?;
        let mut events = Vec::new();
        for line in lines.skip(1).filter(|l| !l.trim().is_empty()) {
            let mut f = line.split(',');
            let mut next = || f.next().ok_or_else(|| bad(line));
            let time = next()?.parse().map_err(|_| bad(line))?;
            let edge = next()?.parse().map_err(|_| bad(line))?;
            let uniform = next()?.parse().map_err(|_| bad(line))?;
            events.push(Event { time, edge, uniform });
        }
        Self::new(horizon, events)
    }
}

/// Per-edge counter-based randomness for one replica of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScheduleSource {
    pub seed: u64,
    pub replica: u64,
}

impl ScheduleSource {
    pub fn new(seed: u64, replica: u64) -> Self {
        Self { seed, replica }
    }

    fn stream(&self, edge: usize) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.replica.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(edge as u64);
        rng
    }

    /// Rings of one edge in `[−horizon, 0]`, latest first: ring `k` sits at
    /// minus the sum of `k` unit exponential gaps.
    pub fn edge_events(&self, edge: usize, horizon: f64) -> Vec<Event> {
        let mut rng = self.stream(edge);
        let mut out = Vec::new();
        let mut back = 0.0;
        loop {
            let gap: f64 = rng.sample(Exp1);
            let uniform: f64 = rng.random();
            back += gap;
            if back > horizon {
                return out;
            }
            out.push(Event {
                time: -back,
                edge,
                uniform,
            });
        }
    }

    pub fn sample(&self, edges: &[usize], horizon: f64) -> UpdateSchedule {
        let mut events: Vec<Event> = edges
            .iter()
            .flat_map(|&e| self.edge_events(e, horizon))
            .collect();
        events.sort_by(event_order);
        UpdateSchedule { horizon, events }
    }
}

/// `η̄`: a boundary condition per time interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundaryRule {
    Constant(BoundaryCondition),
    /// `(start, bc)` pairs with increasing start times; each applies from
    /// its start until the next one. Times before the first start use the
    /// first entry.
    Piecewise(Vec<(f64, BoundaryCondition)>),
}

impl BoundaryRule {
    fn conditions(&self) -> Vec<BoundaryCondition> {
        match self {
            BoundaryRule::Constant(bc) => vec![bc.clone()],
            BoundaryRule::Piecewise(p) => p.iter().map(|(_, bc)| bc.clone()).collect(),
        }
    }

    fn switch_times(&self) -> Vec<f64> {
        match self {
            BoundaryRule::Constant(_) => vec![f64::NEG_INFINITY],
            BoundaryRule::Piecewise(p) => p.iter().map(|&(t, _)| t).collect(),
        }
    }
}

/// Heat-bath dynamics on a region with a fixed menu of boundary
/// conditions; each boundary condition is a block of wiring edges that is
/// switched open while it is active.
#[derive(Debug, Clone)]
pub struct Dynamics {
    region: Arc<Region>,
    params: ModelParams,
    graph: Arc<Graph>,
    blocks: Vec<Range<usize>>,
}

impl Dynamics {
    pub fn new(region: Arc<Region>, params: ModelParams, boundaries: &[BoundaryCondition]) -> Result<Self> {
        params.validate()?;
        if params.z != crate::Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("dynamics needs a real beta".into()));
        }
        let wirings = boundaries
            .iter()
            .map(|bc| region.wiring(bc))
            .collect::<Result<Vec<_>>>()?;
        let mut blocks = Vec::with_capacity(wirings.len());
        let mut at = region.len();
        for w in &wirings {
            blocks.push(at..at + w.pairs.len());
            at += w.pairs.len();
        }
        let refs: Vec<_> = wirings.iter().collect();
        let graph = Arc::new(Graph::region(&region, &refs));
        Ok(Self {
            region,
            params,
            graph,
            blocks,
        })
    }

    /// Free boundary (index 0) and wired boundary (index 1).
    pub fn sandwich(region: Arc<Region>, params: ModelParams) -> Result<Self> {
        Self::new(region, params, &[BoundaryCondition::Free, BoundaryCondition::Wired])
    }

    pub fn region(&self) -> &Arc<Region> {
        &self.region
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    /// A chain started from `omega0` under boundary block `boundary`.
    pub fn start(&self, omega0: &EdgeConfiguration, boundary: usize) -> DynamicsState<'_> {
        let mut conn = ConnectivityState::new(self.graph.clone());
        let n = self.region.len();
        let block = self.blocks[boundary].clone();
        conn.assign((0..self.graph.edge_count()).map(|e| {
            if e < n {
                omega0.get(e)
            } else {
                block.contains(&e)
            }
        }));
        DynamicsState {
            dynamics: self,
            conn,
            boundary,
            p_connected: self.params.p_connected(),
            p_disconnected: self.params.p_disconnected(),
        }
    }

    /// Start from all-closed (`high = false`) or all-open (`high = true`).
    pub fn start_constant(&self, high: bool, boundary: usize) -> DynamicsState<'_> {
        let omega = if high {
            EdgeConfiguration::full(self.region.clone())
        } else {
            EdgeConfiguration::empty(self.region.clone())
        };
        self.start(&omega, boundary)
    }
}

/// A single chain: current configuration on the region plus the active
/// boundary wiring.
#[derive(Debug, Clone)]
pub struct DynamicsState<'a> {
    dynamics: &'a Dynamics,
    conn: ConnectivityState,
    boundary: usize,
    p_connected: f64,
    p_disconnected: f64,
}

impl DynamicsState<'_> {
    pub fn boundary(&self) -> usize {
        self.boundary
    }

    pub fn set_boundary(&mut self, boundary: usize) {
        if boundary == self.boundary {
            return;
        }
        for e in self.dynamics.blocks[self.boundary].clone() {
            self.conn.set_edge(e, false);
        }
        for e in self.dynamics.blocks[boundary].clone() {
            self.conn.set_edge(e, true);
        }
        self.boundary = boundary;
    }

    /// Opening probability of local edge `i` given the rest.
    pub fn update_rate(&mut self, i: usize) -> f64 {
        if self.conn.connected_without(i) {
            self.p_connected
        } else {
            self.p_disconnected
        }
    }

    /// Apply one ring; rings of edges outside the region are ignored.
    /// Returns whether the edge changed state.
    pub fn apply(&mut self, ev: &Event) -> bool {
        match self.dynamics.region.local_index(ev.edge) {
            Some(i) => self.apply_local(i, ev.uniform),
            None => false,
        }
    }

    pub fn apply_local(&mut self, i: usize, uniform: f64) -> bool {
        let open = uniform < self.update_rate(i);
        let changed = self.conn.is_open(i) != open;
        self.conn.set_edge(i, open);
        changed
    }

    pub fn get(&self, i: usize) -> bool {
        self.conn.is_open(i)
    }

    pub fn get_edge(&self, edge: usize) -> Option<bool> {
        self.dynamics.region.local_index(edge).map(|i| self.get(i))
    }

    pub fn config(&self) -> EdgeConfiguration {
        let mut c = EdgeConfiguration::empty(self.dynamics.region.clone());
        for i in 0..self.dynamics.region.len() {
            if self.conn.is_open(i) {
                c.set(i, true);
            }
        }
        c
    }

    pub fn connectivity(&mut self) -> &mut ConnectivityState {
        &mut self.conn
    }

    /// Whether the two chains agree on the listed local edges.
    pub fn agrees_on(&self, other: &DynamicsState<'_>, locals: &[usize]) -> bool {
        locals.iter().all(|&i| self.get(i) == other.get(i))
    }

    /// Edgewise `self ≤ other`.
    pub fn below(&self, other: &DynamicsState<'_>) -> bool {
        (0..self.dynamics.region.len()).all(|i| !self.get(i) || other.get(i))
    }
}

/// `σ_{t,s,Λ}^{ω0,η̄}`: run the rings with time `≤ −t + s`.
pub fn evolve(
    sched: &UpdateSchedule,
    params: &ModelParams,
    omega0: &EdgeConfiguration,
    eta: &BoundaryRule,
    s: f64,
) -> Result<EdgeConfiguration> {
    if !(0.0..=sched.horizon()).contains(&s) {
        return Err(Error::InvalidArgument(format!(
            "duration {s} outside [0, {}]",
            sched.horizon()
        )));
    }
    let dynamics = Dynamics::new(omega0.region().clone(), *params, &eta.conditions())?;
    let switches = eta.switch_times();
    let mut state = dynamics.start(omega0, 0);
    let stop = -sched.horizon() + s;
    let mut next = 1;
    for ev in sched.events().iter().take_while(|ev| ev.time <= stop) {
        while next < switches.len() && switches[next] <= ev.time {
            state.set_boundary(next);
            next += 1;
        }
        state.apply(ev);
    }
    Ok(state.config())
}

/// Low chain from all-closed with free boundary, high chain from all-open
/// with wired boundary, both driven by the rings with time `≤ −t + s`.
pub fn sandwich_evolve(
    sched: &UpdateSchedule,
    region: Arc<Region>,
    params: &ModelParams,
    s: f64,
) -> Result<(EdgeConfiguration, EdgeConfiguration)> {
    let dynamics = Dynamics::sandwich(region, *params)?;
    let mut low = dynamics.start_constant(false, 0);
    let mut high = dynamics.start_constant(true, 1);
    let stop = -sched.horizon() + s;
    for ev in sched.events().iter().take_while(|ev| ev.time <= stop) {
        low.apply(ev);
        high.apply(ev);
    }
    assert!(low.below(&high), "monotone sandwich violated");
    Ok((low.config(), high.config()))
}

/// Disagreement frequency at the edge `{0, e_1}` between the chains started
/// from `(0, free)` and `(1, wired)` on `Λ_N` after time `αN`.
pub fn point_mixing_probe(
    dim: usize,
    half_side: usize,
    alpha: f64,
    params: &ModelParams,
    trials: usize,
    seed: u64,
) -> Result<Proportion> {
    if trials == 0 || half_side == 0 {
        return Err(Error::InvalidArgument("need trials >= 1 and N >= 1".into()));
    }
    let torus = TorusGeometry::new(dim, half_side + 1)?;
    let region = Arc::new(Region::new(torus, torus.edge_window(half_side))?);
    let dynamics = Dynamics::sandwich(region.clone(), *params)?;
    let target = region
        .local_index(torus.edge(torus.origin(), 0))
        .expect("window contains the origin edge");
    let horizon = alpha * half_side as f64;
    let hits: usize = (0..trials as u64)
        .into_par_iter()
        .map(|r| {
            let sched = ScheduleSource::new(seed, r).sample(region.edges(), horizon);
            let mut low = dynamics.start_constant(false, 0);
            let mut high = dynamics.start_constant(true, 1);
            for ev in sched.events() {
                low.apply(ev);
                high.apply(ev);
            }
            usize::from(low.get(target) != high.get(target))
        })
        .sum();
    Ok(Proportion::new(hits as u64, trials as u64))
}
