use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{bad_components, ClassificationField, CoarseConfig};
use crate::glauber::{Dynamics, Event, UpdateSchedule};
use crate::lattice::SpaceTimeLattice;
use crate::{BoundaryCondition, EdgeConfiguration, Error, ModelParams, Region, Result};

/// Why a candidate site set is not a decoupling surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceFailure {
    Empty,
    OutsideLattice(usize),
    NotConnected,
    BadSite(usize),
    MixedModes,
    /// Number of complement components touching the deepest layer.
    InfiniteComponents(usize),
    InteriorNotConnected,
    /// The anchor is not in `S ∪ A(S)`.
    AnchorNotEnclosed(usize),
    /// The region to enclose reaches the deepest materialised layer.
    Unbounded,
}

impl std::fmt::Display for SurfaceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SurfaceFailure::Empty => write!(f, "empty site set"),
            SurfaceFailure::OutsideLattice(s) => write!(f, "site {s} outside the lattice"),
            SurfaceFailure::NotConnected => write!(f, "site set not connected"),
            SurfaceFailure::BadSite(s) => write!(f, "site {s} is bad"),
            SurfaceFailure::MixedModes => write!(f, "sites of different modes"),
            SurfaceFailure::InfiniteComponents(n) => {
                write!(f, "{n} complement components reach the deepest layer")
            }
            SurfaceFailure::InteriorNotConnected => write!(f, "S with its interior is not connected"),
            SurfaceFailure::AnchorNotEnclosed(s) => write!(f, "anchor {s} is not enclosed"),
            SurfaceFailure::Unbounded => write!(f, "bad sites reach the deepest layer"),
        }
    }
}

/// Set of `(edge, backward time)` pairs, stored as per-edge intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeRegion {
    pieces: BTreeMap<usize, Vec<(f64, f64)>>,
    half_open: bool,
}

impl SpaceTimeRegion {
    fn build(
        lattice: &SpaceTimeLattice,
        sites: impl IntoIterator<Item = usize>,
        radius: usize,
        length: f64,
        half_open: bool,
    ) -> Self {
        let mut pieces: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
        for s in sites {
            let start = lattice.time_start(s);
            for e in lattice.base().edge_block(lattice.spatial(s), radius) {
                pieces.entry(e).or_default().push((start, start + length));
            }
        }
        for v in pieces.values_mut() {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        Self { pieces, half_open }
    }

    /// Whether `edge` at backward time `t` lies in the region.
    pub fn contains(&self, edge: usize, t: f64) -> bool {
        self.pieces.get(&edge).is_some_and(|v| {
            v.iter()
                .any(|&(lo, hi)| lo <= t && (t < hi || (!self.half_open && t <= hi)))
        })
    }

    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.pieces.keys().copied()
    }

    /// `(edge, lo, hi)` for every piece, ordered by edge then start.
    pub fn pieces(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.pieces
            .iter()
            .flat_map(|(&e, v)| v.iter().map(move |&(lo, hi)| (e, lo, hi)))
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.values().map(Vec::len).sum()
    }

    /// Deepest backward time covered.
    pub fn depth(&self) -> f64 {
        self.pieces
            .values()
            .flatten()
            .map(|&(_, hi)| hi)
            .fold(0.0, f64::max)
    }
}

/// A verified decoupling surface `S` with its interior `A(S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingSurface {
    pub sites: Vec<usize>,
    pub interior: Vec<usize>,
    lattice: SpaceTimeLattice,
}

impl DecouplingSurface {
    pub fn lattice(&self) -> &SpaceTimeLattice {
        &self.lattice
    }

    /// `S ∪ A(S)`, sorted.
    pub fn enclosed(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.sites.iter().chain(&self.interior).copied().collect();
        all.sort_unstable();
        all
    }

    /// `S̄ = ⋃_{S ∪ A} E_{2L}(x^s) × [x^t, x^t + 3K/2]`.
    pub fn closure(&self) -> SpaceTimeRegion {
        let l = self.lattice.base().scale();
        let k = self.lattice.time_block();
        SpaceTimeRegion::build(&self.lattice, self.enclosed(), 2 * l, 1.5 * k, false)
    }

    /// `S̊ = ⋃_{S ∪ A} E_L(x^s) × [x^t, x^t + K)`.
    pub fn core(&self) -> SpaceTimeRegion {
        let l = self.lattice.base().scale();
        let k = self.lattice.time_block();
        SpaceTimeRegion::build(&self.lattice, self.enclosed(), l, k, true)
    }

    /// `S' = ⋃_S E_{3L/2}(x^s) × [x^t, x^t + K)`.
    pub fn shell(&self) -> SpaceTimeRegion {
        let l = self.lattice.base().scale();
        let k = self.lattice.time_block();
        SpaceTimeRegion::build(&self.lattice, self.sites.iter().copied(), 3 * l / 2, k, true)
    }

    /// `S̄' = ⋃_S E_{2L}(x^s) × [x^t, x^t + 3K/2]`.
    pub fn shell_closure(&self) -> SpaceTimeRegion {
        let l = self.lattice.base().scale();
        let k = self.lattice.time_block();
        SpaceTimeRegion::build(&self.lattice, self.sites.iter().copied(), 2 * l, 1.5 * k, false)
    }
}

fn star_components(lattice: &SpaceTimeLattice, blocked: &[bool]) -> Vec<Vec<usize>> {
    let n = lattice.site_count();
    let mut seen = blocked.to_vec();
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in lattice.star_neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Check the three defining conditions. The star component of the
/// complement touching the deepest materialised layer plays the infinite
/// one.
pub fn verify_decoupling_surface(
    sites: &[usize],
    field: &ClassificationField,
) -> std::result::Result<DecouplingSurface, SurfaceFailure> {
    let lattice = &field.lattice;
    let sites: Vec<usize> = sites.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let Some(&first) = sites.first() else {
        return Err(SurfaceFailure::Empty);
    };
    if let Some(&s) = sites.iter().find(|&&s| s >= lattice.site_count()) {
        return Err(SurfaceFailure::OutsideLattice(s));
    }
    if let Some(&s) = sites.iter().find(|&&s| !field.is_good(s)) {
        return Err(SurfaceFailure::BadSite(s));
    }
    let mode = field.boxes[first].mode;
    if sites.iter().any(|&s| field.boxes[s].mode != mode) {
        return Err(SurfaceFailure::MixedModes);
    }
    if !lattice.is_connected(&sites) {
        return Err(SurfaceFailure::NotConnected);
    }
    let mut blocked = vec![false; lattice.site_count()];
    for &s in &sites {
        blocked[s] = true;
    }
    let deepest = lattice.layers() - 1;
    let mut infinite = 0;
    let mut interior = Vec::new();
    for comp in star_components(lattice, &blocked) {
        if comp.iter().any(|&s| lattice.layer(s) == deepest) {
            infinite += 1;
        } else {
            interior.extend(comp);
        }
    }
    if infinite != 1 {
        return Err(SurfaceFailure::InfiniteComponents(infinite));
    }
    interior.sort_unstable();
    let surface = DecouplingSurface {
        sites,
        interior,
        lattice: lattice.clone(),
    };
    if !lattice.is_connected(&surface.enclosed()) {
        return Err(SurfaceFailure::InteriorNotConnected);
    }
    Ok(surface)
}

/// The outer star boundary of the radius-1 dilation of the bad sites
/// seeding `anchor`'s information cluster and of the anchor itself (just
/// `{anchor}` when there are none). Bad components the boundary runs into are absorbed until it
/// is all good.
pub fn find_surface(
    field: &ClassificationField,
    anchor: usize,
) -> std::result::Result<DecouplingSurface, SurfaceFailure> {
    let lattice = &field.lattice;
    let n = lattice.site_count();
    if anchor >= n {
        return Err(SurfaceFailure::OutsideLattice(anchor));
    }
    let components = bad_components(field);
    let mut component_of = vec![usize::MAX; n];
    for (k, comp) in components.iter().enumerate() {
        for &s in comp {
            component_of[s] = k;
        }
    }
    let mut absorbed = vec![false; components.len()];
    let mut inner = vec![false; n];
    inner[anchor] = true;
    let mut pending: Vec<usize> = lattice
        .ball(anchor, 2)
        .into_iter()
        .filter_map(|s| (component_of[s] != usize::MAX).then_some(component_of[s]))
        .collect();
    if !pending.is_empty() {
        // joins the anchor to the dilated seeds
        for y in lattice.ball(anchor, 1) {
            inner[y] = true;
        }
    }
    loop {
        for k in pending.drain(..) {
            if std::mem::replace(&mut absorbed[k], true) {
                continue;
            }
            for &m in &components[k] {
                for y in lattice.ball(m, 1) {
                    inner[y] = true;
                }
            }
        }
        let deepest = lattice.layers() - 1;
        if (0..n).any(|s| inner[s] && lattice.layer(s) == deepest) {
            return Err(SurfaceFailure::Unbounded);
        }
        let candidate = outer_boundary(lattice, &inner);
        pending.extend(
            candidate
                .iter()
                .filter(|&&s| !field.is_good(s))
                .map(|&s| component_of[s]),
        );
        if pending.is_empty() {
            let surface = verify_decoupling_surface(&candidate, field)?;
            if !surface.sites.contains(&anchor) && !surface.interior.contains(&anchor) {
                return Err(SurfaceFailure::AnchorNotEnclosed(anchor));
            }
            return Ok(surface);
        }
    }
}

/// Sites of the deepest-layer-reaching complement of `inner` that are
/// star-adjacent to `inner`.
fn outer_boundary(lattice: &SpaceTimeLattice, inner: &[bool]) -> Vec<usize> {
    let n = lattice.site_count();
    let deepest = lattice.layers() - 1;
    let mut outside = vec![false; n];
    let mut seen = inner.to_vec();
    for s in 0..n {
        if seen[s] || lattice.layer(s) != deepest {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            outside[u] = true;
            for v in lattice.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    (0..n)
        .filter(|&s| outside[s] && lattice.star_neighbors(s).iter().any(|&t| inner[t]))
        .collect()
}

/// Edits to the schedule and initial configuration, applied only outside
/// a protected space-time region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub seed: u64,
    /// Probability of redrawing each unprotected uniform.
    pub resample: f64,
    /// Probability of deleting each unprotected ring.
    pub delete: f64,
    /// Rate per edge and unit time of extra rings (kept when unprotected).
    pub insert_rate: f64,
    /// Probability of flipping each edge of the initial configuration.
    pub flip_initial: f64,
}

impl Perturbation {
    pub fn identity() -> Self {
        Self {
            seed: 0,
            resample: 0.0,
            delete: 0.0,
            insert_rate: 0.0,
            flip_initial: 0.0,
        }
    }

    pub fn random(seed: u64) -> Self {
        Self {
            seed,
            resample: 0.5,
            delete: 0.2,
            insert_rate: 0.3,
            flip_initial: 0.5,
        }
    }

    /// Perturbed copies of `sched` and `initial`; nothing in `protected`
    /// is touched.
    pub fn apply(
        &self,
        sched: &UpdateSchedule,
        initial: &EdgeConfiguration,
        protected: &SpaceTimeRegion,
    ) -> Result<(UpdateSchedule, EdgeConfiguration)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut events = Vec::with_capacity(sched.len());
        for ev in sched.events() {
            if protected.contains(ev.edge, -ev.time) {
                events.push(*ev);
                continue;
            }
            if rng.random::<f64>() < self.delete {
                continue;
            }
            let mut ev = *ev;
            if rng.random::<f64>() < self.resample {
                ev.uniform = rng.random();
            }
            events.push(ev);
        }
        let edges = initial.region().edges();
        let horizon = sched.horizon();
        let mean = self.insert_rate * horizon * edges.len() as f64;
        if mean > 0.0 {
            let count = Poisson::new(mean)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .sample(&mut rng) as usize;
            for _ in 0..count {
                let edge = edges[rng.random_range(0..edges.len())];
                let time = -horizon * rng.random::<f64>();
                if !protected.contains(edge, -time) {
                    events.push(Event {
                        time,
                        edge,
                        uniform: rng.random(),
                    });
                }
            }
        }
        let mut omega = initial.clone();
        for i in 0..omega.len() {
            if rng.random::<f64>() < self.flip_initial {
                omega.set(i, !omega.get(i));
            }
        }
        Ok((UpdateSchedule::new(horizon, events)?, omega))
    }
}

/// The trajectory of every `S̊` piece: its state at the start of the piece
/// followed by its state after each ring inside the piece.
pub fn core_trajectories(
    params: &ModelParams,
    sched: &UpdateSchedule,
    initial: &EdgeConfiguration,
    core: &SpaceTimeRegion,
) -> Result<Vec<Vec<bool>>> {
    let region: &Arc<Region> = initial.region();
    let dynamics = Dynamics::new(region.clone(), *params, &[BoundaryCondition::Periodic])?;
    let pieces: Vec<(usize, f64, f64)> = core.pieces().collect();
    let mut local = Vec::with_capacity(pieces.len());
    for &(e, _, _) in &pieces {
        local.push(region.local_index(e).ok_or_else(|| {
            Error::InvalidArgument(format!("edge {e} outside the dynamics region"))
        })?);
    }
    let mut by_edge: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (p, &(e, _, _)) in pieces.iter().enumerate() {
        by_edge.entry(e).or_default().push(p);
    }
    // start of piece p in real time is -hi
    let mut starts: Vec<(f64, usize)> = pieces.iter().enumerate().map(|(p, &(_, _, hi))| (-hi, p)).collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out = vec![Vec::new(); pieces.len()];
    let mut state = dynamics.start(initial, 0);
    let mut next = 0;
    for ev in sched.events() {
        while next < starts.len() && starts[next].0 < ev.time {
            let p = starts[next].1;
            out[p].push(state.get(local[p]));
            next += 1;
        }
        state.apply(ev);
        if let Some(ps) = by_edge.get(&ev.edge) {
            let t = -ev.time;
            for &p in ps {
                let (_, lo, hi) = pieces[p];
                if lo <= t && t < hi {
                    out[p].push(state.get(local[p]));
                }
            }
        }
    }
    for &(_, p) in &starts[next..] {
        out[p].push(state.get(local[p]));
    }
    Ok(out)
}

/// Recompute the `S̊` trajectories after perturbing everything outside `S̄`
/// on the full periodic torus; `true` iff nothing changed.
pub fn locality_check(
    surface: &DecouplingSurface,
    params: &ModelParams,
    sched: &UpdateSchedule,
    initial: &EdgeConfiguration,
    perturbation: &Perturbation,
) -> Result<bool> {
    let closure = surface.closure();
    if sched.horizon() <= closure.depth() {
        return Err(Error::WindowTooSmall(format!(
            "schedule horizon {} does not extend past the surface closure depth {}",
            sched.horizon(),
            closure.depth()
        )));
    }
    let core = surface.core();
    let before = core_trajectories(params, sched, initial, &core)?;
    let (sched2, initial2) = perturbation.apply(sched, initial, &closure)?;
    let after = core_trajectories(params, &sched2, &initial2, &core)?;
    Ok(before == after)
}

/// Backward time a global schedule needs for the locality test.
pub fn locality_horizon(config: &CoarseConfig) -> f64 {
    config.depth() + config.time_block()
}
