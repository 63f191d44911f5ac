use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CoarseConfig, Mode, Witness};
use crate::connectivity::VertexBox;
use crate::glauber::{Dynamics, DynamicsState, Event, UpdateSchedule};
use crate::lattice::{CoarseLattice, SpaceTimeLattice, TorusGeometry};
use crate::{Error, ModelParams, Region, Result};

/// Verdict for one space-time site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxClassification {
    pub site: usize,
    pub mode: Mode,
    pub good: bool,
    pub witness: Witness,
}

#[derive(Debug, Clone)]
struct SiteWindow {
    dynamics: Dynamics,
    inner: Vec<usize>,
    cluster_box: VertexBox,
}

/// Classifies space-time sites from the clock rings in their windows.
#[derive(Debug, Clone)]
pub struct BoxClassifier {
    config: CoarseConfig,
    lattice: SpaceTimeLattice,
    windows: Vec<SiteWindow>,
}

impl BoxClassifier {
    pub fn new(torus: TorusGeometry, config: CoarseConfig, params: ModelParams) -> Result<Self> {
        config.validate()?;
        let l = config.scale;
        if 4 * l + 1 > torus.side() {
            return Err(Error::WindowTooSmall(format!(
                "E_2L windows of scale {l} wrap around a torus of side {}",
                torus.side()
            )));
        }
        let coarse = CoarseLattice::new(torus, l)?;
        let lattice = SpaceTimeLattice::new(coarse.clone(), config.time_block(), config.layers)?;
        let windows = (0..coarse.site_count())
            .map(|x| {
                let c = coarse.center(x);
                let outer = Arc::new(Region::new(torus, torus.edge_block(c, 2 * l))?);
                let inner = torus
                    .edge_block(c, config.inner_radius())
                    .into_iter()
                    .map(|e| outer.local_index(e).expect("inner block inside window"))
                    .collect();
                Ok(SiteWindow {
                    dynamics: Dynamics::sandwich(outer, params)?,
                    inner,
                    cluster_box: VertexBox::new(torus, c, config.inner_radius())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config,
            lattice,
            windows,
        })
    }

    pub fn config(&self) -> &CoarseConfig {
        &self.config
    }

    pub fn lattice(&self) -> &SpaceTimeLattice {
        &self.lattice
    }

    /// Ambient edges of `E_{2L}(x^s)`.
    pub fn window_edges(&self, spatial: usize) -> &[usize] {
        self.windows[spatial].dynamics.region().edges()
    }

    /// Backward-time window `[x^t, x^t + 3K/2]` of site `s`.
    pub fn window_times(&self, s: usize) -> (f64, f64) {
        let start = self.lattice.time_start(s);
        (start, start + 1.5 * self.config.time_block())
    }

    /// Rings of `sched` inside the window of `s`.
    pub fn window_events(&self, sched: &UpdateSchedule, s: usize) -> Vec<Event> {
        let (lo, hi) = self.window_times(s);
        let region = self.windows[self.lattice.spatial(s)].dynamics.region();
        sched.slice(-hi, -lo, |e| region.contains_edge(e))
    }

    fn geometry_ok(&self, w: &SiteWindow, chain: &DynamicsState<'_>) -> bool {
        let theta = self.config.threshold();
        let clusters = w.cluster_box.clusters(|e| chain.get_edge(e).unwrap_or(false));
        match self.config.mode {
            Mode::Close => clusters.max_diameter() < theta,
            Mode::Open => clusters.spans && clusters.count_at_least(theta) <= 1,
        }
    }

    /// Classify site `s` from the rings of its window (events outside the
    /// window edges or times are rejected).
    pub fn classify(&self, s: usize, events: &[Event]) -> Result<BoxClassification> {
        let w = &self.windows[self.lattice.spatial(s)];
        let (lo, hi) = self.window_times(s);
        let k = self.config.time_block();
        let check_from = -(lo + k);
        let mut low = w.dynamics.start_constant(false, 0);
        let mut high = w.dynamics.start_constant(true, 1);
        let verdict = |witness| BoxClassification {
            site: s,
            mode: self.config.mode,
            good: witness == Witness::None,
            witness,
        };
        let check = |low: &DynamicsState<'_>, high: &DynamicsState<'_>| {
            if !low.agrees_on(high, &w.inner) {
                Some(Witness::Coalescence)
            } else if !self.geometry_ok(w, low) {
                Some(Witness::ClusterGeometry)
            } else {
                None
            }
        };
        let mut checked = false;
        for ev in events {
            if ev.time < -hi || ev.time > -lo || !w.dynamics.region().contains_edge(ev.edge) {
                return Err(Error::WindowTooSmall(format!(
                    "event at time {} on edge {} lies outside the window of site {s}",
                    ev.time, ev.edge
                )));
            }
            if ev.time > check_from && !checked {
                checked = true;
                if let Some(f) = check(&low, &high) {
                    return Ok(verdict(f));
                }
            }
            low.apply(ev);
            high.apply(ev);
            if ev.time > check_from {
                if let Some(f) = check(&low, &high) {
                    return Ok(verdict(f));
                }
            }
        }
        if !checked {
            if let Some(f) = check(&low, &high) {
                return Ok(verdict(f));
            }
        }
        Ok(verdict(Witness::None))
    }

    /// Classify site `s` from the relevant part of a global schedule.
    pub fn classify_from(&self, sched: &UpdateSchedule, s: usize) -> Result<BoxClassification> {
        self.classify(s, &self.window_events(sched, s))
    }
}

/// Verdicts for every materialised site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationField {
    pub lattice: SpaceTimeLattice,
    pub boxes: Vec<BoxClassification>,
}

impl ClassificationField {
    /// I.i.d. bad sites with probability `p`, all close mode.
    pub fn planted(lattice: SpaceTimeLattice, p: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let boxes = (0..lattice.site_count())
            .map(|site| {
                let good = rng.random::<f64>() >= p;
                BoxClassification {
                    site,
                    mode: Mode::Close,
                    good,
                    witness: if good { Witness::None } else { Witness::Coalescence },
                }
            })
            .collect();
        Self { lattice, boxes }
    }

    pub fn is_good(&self, s: usize) -> bool {
        self.boxes[s].good
    }

    pub fn bad_sites(&self) -> Vec<usize> {
        self.boxes.iter().filter(|b| !b.good).map(|b| b.site).collect()
    }

    pub fn bad_count(&self) -> usize {
        self.boxes.iter().filter(|b| !b.good).count()
    }

    /// `site,coords...,layer,mode,verdict,witness` rows.
    pub fn to_csv(&self) -> String {
        let base = self.lattice.base();
        let mut out = String::from("# classification v1\nsite,coords,layer,mode,verdict,witness\n");
        for b in &self.boxes {
            let coords: Vec<String> = base
                .site_coords(self.lattice.spatial(b.site))
                .iter()
                .map(ToString::to_string)
                .collect();
            out.push_str(&format!(
                "{},{},{},{},{},{:?}\n",
                b.site,
                coords.join(" "),
                self.lattice.layer(b.site),
                b.mode,
                if b.good { "good" } else { "bad" },
                b.witness
            ));
        }
        out
    }
}

/// Classify every site of the classifier's lattice.
pub fn classify_field(classifier: &BoxClassifier, sched: &UpdateSchedule) -> Result<ClassificationField> {
    let need = classifier.config().depth();
    if sched.horizon() < need {
        return Err(Error::WindowTooSmall(format!(
            "schedule covers backward time {} but the windows need {need}",
            sched.horizon()
        )));
    }
    let boxes = (0..classifier.lattice().site_count())
        .into_par_iter()
        .map(|s| classifier.classify_from(sched, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassificationField {
        lattice: classifier.lattice().clone(),
        boxes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glauber::ScheduleSource;

    fn setup(mode: Mode, beta: f64) -> BoxClassifier {
        let torus = TorusGeometry::new(1, 7).unwrap();
        BoxClassifier::new(torus, CoarseConfig::new(1, 6.0, 3, mode), ModelParams::new(2.0, beta)).unwrap()
    }

    #[test]
    fn no_events_means_bad() {
        let c = setup(Mode::Close, 0.5);
        let v = c.classify(0, &[]).unwrap();
        assert!(!v.good);
        assert_eq!(v.witness, Witness::Coalescence);
    }

    #[test]
    fn early_closing_rings_give_close_good() {
        let c = setup(Mode::Close, 0.5);
        let s = c.lattice().site(2, 1);
        let (lo, hi) = c.window_times(s);
        let events: Vec<Event> = c
            .window_edges(2)
            .iter()
            .enumerate()
            .map(|(k, &e)| Event {
                time: -hi + 0.01 * (k + 1) as f64,
                edge: e,
                uniform: 0.999,
            })
            .collect();
        assert!(events.iter().all(|ev| ev.time < -lo));
        let v = c.classify(s, &events).unwrap();
        assert!(v.good, "{v:?}");
        let open = setup(Mode::Open, 0.5).classify(s, &events).unwrap();
        assert_eq!(open.witness, Witness::ClusterGeometry);
    }

    #[test]
    fn outside_events_rejected() {
        let c = setup(Mode::Close, 0.5);
        let far = Event { time: -0.5, edge: 10, uniform: 0.5 };
        assert!(matches!(c.classify(0, &[far]), Err(Error::WindowTooSmall(_))));
    }

    #[test]
    fn zero_beta_large_k_mostly_good() {
        let torus = TorusGeometry::new(1, 7).unwrap();
        let cfg = CoarseConfig::new(1, 30.0, 2, Mode::Close);
        let c = BoxClassifier::new(torus, cfg, ModelParams::new(2.0, 0.0)).unwrap();
        let mut good = 0;
        let mut total = 0;
        for r in 0..20 {
            let sched = ScheduleSource::new(8, r).sample(&(0..15).collect::<Vec<_>>(), cfg.depth());
            let field = classify_field(&c, &sched).unwrap();
            good += field.boxes.len() - field.bad_count();
            total += field.boxes.len();
        }
        assert!(good as f64 / total as f64 > 0.99);
    }

    #[test]
    fn short_schedule_rejected() {
        let c = setup(Mode::Close, 0.5);
        let sched = ScheduleSource::new(1, 1).sample(&[0, 1], 1.0);
        assert!(classify_field(&c, &sched).is_err());
    }

    #[test]
    fn oversized_window_rejected() {
        let torus = TorusGeometry::new(1, 1).unwrap();
        assert!(BoxClassifier::new(torus, CoarseConfig::new(1, 4.0, 2, Mode::Close), ModelParams::new(2.0, 1.0)).is_err());
    }

    #[test]
    fn verdicts_ignore_rings_outside_the_window() {
        let torus = TorusGeometry::new(1, 7).unwrap();
        let cfg = CoarseConfig::new(1, 4.0, 3, Mode::Close);
        let c = BoxClassifier::new(torus, cfg, ModelParams::new(2.0, 0.3)).unwrap();
        let edges: Vec<usize> = (0..15).collect();
        let a = ScheduleSource::new(5, 0).sample(&edges, cfg.depth());
        let b = ScheduleSource::new(6, 0).sample(&edges, cfg.depth());
        for s in 0..c.lattice().site_count() {
            let (lo, hi) = c.window_times(s);
            let inside = |ev: &Event| {
                ev.time >= -hi && ev.time <= -lo && c.window_edges(c.lattice().spatial(s)).contains(&ev.edge)
            };
            let mixed: Vec<Event> = a
                .events()
                .iter()
                .filter(|ev| inside(ev))
                .chain(b.events().iter().filter(|ev| !inside(ev)))
                .copied()
                .collect();
            let mixed = UpdateSchedule::new(cfg.depth(), mixed).unwrap();
            assert_eq!(c.classify_from(&a, s).unwrap(), c.classify_from(&mixed, s).unwrap());
        }
    }
}
