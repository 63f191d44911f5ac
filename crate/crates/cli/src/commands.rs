use std::sync::Arc;

use rcx_core::cftp::{DoublingPolicy, Sampler};
use rcx_core::coarse::{
    classify_field, h1_probe, h2_probe, layer_zero_clusters, tail_estimate, BoxClassifier, Mode,
};
use rcx_core::glauber::{point_mixing_probe, sandwich_evolve, ScheduleSource};
use rcx_core::io::Table;
use rcx_core::polymer::{
    correlation_function, draw_samples, exact_correlation, exact_pressure, pressure_perturbation,
    weight_samples, CouplingSample, DynamicsCoupling, PolymerSystem, SiteActivity, WeightOptions,
    DEFAULT_BATCHES,
};
use rcx_core::rc::{es_identity_check, ising_potts_bridge, potts_partition, RcSystem};
use rcx_core::stats::total_variation;
use rcx_core::{BoundaryCondition, CoarseLattice, Error, Region, TorusGeometry};
use serde_json::json;

use crate::config::Settings;
use crate::output::Artifacts;
use crate::CliError;

const MIN_TAIL_COUNT: u64 = 30;
/// Largest target window whose empirical law is tabulated.
const MAX_HISTOGRAM_EDGES: usize = 16;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

fn enumerable(s: &Settings, torus: &TorusGeometry) -> bool {
    torus.edge_count() <= s.cap
}

fn cap_check(s: &Settings, torus: &TorusGeometry, what: &'static str) -> Result<(), CliError> {
    if enumerable(s, torus) {
        Ok(())
    } else {
        Err(Error::CapExceeded {
            what,
            needed: torus.edge_count(),
            cap: s.cap,
        }
        .into())
    }
}

pub fn enumerate(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let torus = s.torus()?;
    cap_check(s, &torus, "torus edges")?;
    let params = s.params();
    let region = Arc::new(Region::full(torus));
    let rc = RcSystem::new(region, BoundaryCondition::Periodic)?.with_cap(s.cap);
    let all: Vec<usize> = (0..torus.vertex_count()).collect();
    let mut t = Table::new("enumerate", 1, &["quantity", "value"]);
    t.push(["edges".to_string(), torus.edge_count().to_string()])?;
    t.push(["z_rc_periodic".to_string(), rc.partition(&params)?.re.to_string()])?;
    if params.q.fract() == 0.0 {
        let potts = potts_partition(&torus, &all, &params, &BoundaryCondition::Periodic)?;
        t.push(["z_potts_periodic".to_string(), potts.to_string()])?;
        t.push(["es_relative_error".to_string(), es_identity_check(&torus, &params)?.to_string()])?;
    }
    let bridge = ising_potts_bridge(&torus, &all, s.beta, &BoundaryCondition::Periodic)?;
    t.push(["z_ising_periodic".to_string(), bridge.ising.to_string()])?;
    t.push(["potts_at_double_beta_scaled".to_string(), bridge.potts_double_beta.to_string()])?;
    t.push(["potts_at_same_beta_scaled".to_string(), bridge.potts_same_beta.to_string()])?;
    t.push(["bridge_double_beta_error".to_string(), bridge.double_beta_discrepancy.to_string()])?;
    t.push(["bridge_same_beta_error".to_string(), bridge.same_beta_discrepancy.to_string()])?;
    out.write("enumerate.csv", &t.to_csv())?;

    let mut grid = Table::new("tilted", 1, &["z_re", "z_im", "g_re", "g_im", "pressure_re", "pressure_im"]);
    for z in s.z_grid() {
        let p = params.with_z(z);
        let g = rc.tilted_expectation(&p)?;
        let f = exact_pressure(&torus, &p)?;
        grid.push([z.re, z.im, g.re, g.im, f.re, f.im])?;
    }
    out.write("tilted.csv", &grid.to_csv())
}

/// Volume and target of `sample-cftp` and `glauber-run`: the whole torus
/// for periodic boundaries, otherwise `Λ_N` inside a torus one larger.
fn window(s: &Settings) -> Result<(Arc<Region>, BoundaryCondition), CliError> {
    let bc = s.bc()?;
    if bc == BoundaryCondition::Periodic {
        return Ok((Arc::new(Region::full(s.torus()?)), bc));
    }
    let torus = TorusGeometry::new(s.dim, s.half_side + 1)?;
    Ok((Arc::new(Region::new(torus, torus.edge_window(s.half_side))?), bc))
}

pub fn sample_cftp(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let (region, bc) = window(s)?;
    let params = s.params();
    let sampler = Sampler::new(region.clone(), region.clone(), params, bc.clone())?;
    let policy = DoublingPolicy::for_region(&region);
    let mut t = Table::new("cftp_samples", 1, &["replica", "horizon", "checksum", "open", "config"]);
    let mut masks = Vec::with_capacity(s.trials);
    let mut failure = None;
    for r in 0..s.trials as u64 {
        let res = sampler.sample(&ScheduleSource::new(s.seed, r), &policy);
        match res.sample {
            Some(omega) => {
                masks.push(omega.mask());
                t.push([
                    r.to_string(),
                    res.horizon.to_string(),
                    format!("{:016x}", res.checksum),
                    omega.open_count().to_string(),
                    omega.bitstring(),
                ])?;
            }
            None => {
                failure = Some(Error::NotCoalesced { horizon: res.horizon });
                break;
            }
        }
    }
    out.write("samples.csv", &t.to_csv())?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let mut summary = json!({
        "edges": region.len(),
        "boundary": bc.to_string(),
        "samples": masks.len(),
    });
    if region.len() <= MAX_HISTOGRAM_EDGES {
        let exact = RcSystem::new(region.clone(), bc)?.with_cap(s.cap).probabilities(&params)?;
        let mut counts = vec![0.0; exact.len()];
        for &m in &masks {
            counts[m as usize] += 1.0 / masks.len() as f64;
        }
        summary["total_variation"] = json!(total_variation(&counts, &exact));
    }
    out.write_json("summary.json", &summary)
}

pub fn glauber_run(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let (region, _) = window(s)?;
    let params = s.params();
    let mut t = Table::new("glauber", 1, &["replica", "events", "low_open", "high_open", "disagreements"]);
    let mut coalesced = 0;
    for r in 0..s.trials as u64 {
        let sched = ScheduleSource::new(s.seed, r).sample(region.edges(), s.time);
        let (low, high) = sandwich_evolve(&sched, region.clone(), &params, s.time)?;
        let disagree = (0..region.len()).filter(|&i| low.get(i) != high.get(i)).count();
        coalesced += usize::from(disagree == 0);
        t.push([r, sched.len() as u64, low.open_count() as u64, high.open_count() as u64, disagree as u64])?;
    }
    out.write("runs.csv", &t.to_csv())?;
    out.write_json(
        "summary.json",
        &json!({ "edges": region.len(), "time": s.time, "runs": s.trials, "coalesced": coalesced }),
    )
}

pub fn coarse_scan(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let torus = s.torus()?;
    let config = s.coarse();
    let classifier = BoxClassifier::new(torus, config, s.params())?;
    let edges: Vec<usize> = (0..torus.edge_count()).collect();
    let mut clusters = Table::new("clusters", 1, &["replica", "anchor", "size", "truncated"]);
    let mut sizes = Vec::new();
    let (mut bad, mut boxes) = (0, 0);
    for r in 0..s.trials as u64 {
        let sched = ScheduleSource::new(s.seed, r).sample(&edges, config.depth());
        let field = classify_field(&classifier, &sched)?;
        if r == 0 {
            out.write("classification.csv", &field.to_csv())?;
        }
        bad += field.bad_count();
        boxes += field.boxes.len();
        for c in layer_zero_clusters(&field) {
            sizes.push(c.size());
            clusters.push([r.to_string(), c.anchor.to_string(), c.size().to_string(), c.truncated.to_string()])?;
        }
    }
    out.write("clusters.csv", &clusters.to_csv())?;
    let fit = tail_estimate(&sizes, MIN_TAIL_COUNT)?;
    out.write("survival.csv", &fit.to_csv())?;
    out.write_json(
        "summary.json",
        &json!({
            "fields": s.trials,
            "bad_fraction": bad as f64 / boxes as f64,
            "threshold": config.threshold(),
            "time_block": config.time_block(),
            "clusters": sizes.len(),
            "rate": fit.rate,
            "prefactor": fit.prefactor,
            "r_squared": fit.r_squared,
            "fit_max": fit.fit_max,
        }),
    )
}

struct Pipeline {
    torus: TorusGeometry,
    system: PolymerSystem,
    samples: Vec<CouplingSample>,
}

fn pipeline(s: &Settings) -> Result<Pipeline, CliError> {
    let torus = s.torus()?;
    let coupling = DynamicsCoupling::new(torus, s.coarse(), s.params(), s.seed)?;
    let lattice = CoarseLattice::new(torus, s.coarse_scale)?;
    let system = PolymerSystem::new(lattice, s.max_size, s.max_order)?;
    let samples = draw_samples(&coupling, s.trials, 0)?;
    Ok(Pipeline { torus, system, samples })
}

pub fn expand(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let p = pipeline(s)?;
    let z = s.z_grid()[0];
    let params = s.params().with_z(z);
    let act = SiteActivity::plain(&params)?;
    let ws = weight_samples(&p.samples, p.system.lattice(), p.system.polymers(), &act, z, WeightOptions::default())?;
    let mut t = Table::new("weights", 1, &["polymer", "size", "w_re", "w_im", "std_error"]);
    for (k, e) in ws.estimates().iter().enumerate() {
        let sites: Vec<String> = p.system.polymers()[k].sites().iter().map(ToString::to_string).collect();
        t.push([sites.join(" "), e.polymer.len().to_string(), e.estimate.re.to_string(), e.estimate.im.to_string(), e.std_error.to_string()])?;
    }
    out.write("weights.csv", &t.to_csv())?;
    let series = p.system.table().series(&ws.means());
    out.write("series.csv", &series.to_csv())?;
    out.write_json(
        "summary.json",
        &json!({
            "z": [z.re, z.im],
            "polymers": p.system.polymers().len(),
            "cluster_terms": p.system.table().term_count(),
            "samples": ws.sample_count(),
            "log_z": [series.total().re, series.total().im],
            "envelope": series.envelope(series.max_order()),
            "certified_with": p.system.certify(&ws.upper_bounds(2.0))?,
        }),
    )
}

pub fn pressure(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let p = pipeline(s)?;
    let mut t = Table::new(
        "pressure",
        1,
        &["z_re", "z_im", "f_re", "f_im", "envelope", "std_error", "exact_re", "exact_im", "certified_a"],
    );
    for z in s.z_grid() {
        let params = s.params().with_z(z);
        let act = SiteActivity::plain(&params)?;
        let ws = weight_samples(&p.samples, p.system.lattice(), p.system.polymers(), &act, z, WeightOptions::default())?;
        let exact = if enumerable(s, &p.torus) {
            Some(exact_pressure(&p.torus, &params)?)
        } else {
            None
        };
        let e = pressure_perturbation(&p.system, &ws, exact, DEFAULT_BATCHES)?;
        t.push([
            z.re.to_string(),
            z.im.to_string(),
            e.estimate.re.to_string(),
            e.estimate.im.to_string(),
            e.envelope.to_string(),
            e.std_error.to_string(),
            opt(exact.map(|c| c.re)),
            opt(exact.map(|c| c.im)),
            opt(e.certified_with),
        ])?;
    }
    out.write("pressure.csv", &t.to_csv())
}

pub fn correlate(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let p = pipeline(s)?;
    let edges = s
        .edges
        .clone()
        .unwrap_or_else(|| vec![p.torus.edge(p.torus.origin(), 0)]);
    let mut t = Table::new(
        "correlation",
        1,
        &["z_re", "z_im", "ratio_re", "ratio_im", "envelope", "std_error", "exact_re", "exact_im", "certified_a"],
    );
    let opts = WeightOptions::default();
    for z in s.z_grid() {
        let params = s.params().with_z(z);
        let plain = SiteActivity::plain(&params)?;
        let modified = SiteActivity::modified(&params, p.system.lattice(), &edges)?;
        let (lattice, polymers) = (p.system.lattice(), p.system.polymers());
        let wp = weight_samples(&p.samples, lattice, polymers, &plain, z, opts)?;
        let wm = weight_samples(&p.samples, lattice, polymers, &modified, z, opts)?;
        let exact = if enumerable(s, &p.torus) {
            Some(exact_correlation(&p.torus, &edges, &params)?)
        } else {
            None
        };
        let e = correlation_function(&p.system, &edges, &wp, &wm, exact, DEFAULT_BATCHES)?;
        t.push([
            z.re.to_string(),
            z.im.to_string(),
            e.estimate.re.to_string(),
            e.estimate.im.to_string(),
            e.envelope.to_string(),
            e.std_error.to_string(),
            opt(exact.map(|c| c.re)),
            opt(exact.map(|c| c.im)),
            opt(e.certified_with),
        ])?;
    }
    out.write("correlation.csv", &t.to_csv())
}

pub fn probe_hypotheses(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let params = s.params();
    let mut t = Table::new(
        "hypotheses",
        1,
        &["n", "a", "h1_tv", "h1_std_error", "h1_exact", "threshold", "h2_close", "h2_open"],
    );
    for n in 1..=s.half_side {
        let h1 = h1_probe(s.dim, n, s.alpha, &params, s.trials, s.seed)?;
        let threshold = ((n as f64 / s.divisor).ceil() as usize).max(1);
        let close = h2_probe(s.dim, n, s.alpha, &params, Mode::Close, threshold, s.trials, s.seed)?;
        let open = h2_probe(s.dim, n, s.alpha, &params, Mode::Open, threshold, s.trials, s.seed)?;
        t.push([
            n.to_string(),
            s.alpha.to_string(),
            h1.tv.to_string(),
            h1.std_error.to_string(),
            h1.exact.to_string(),
            threshold.to_string(),
            close.estimate().to_string(),
            open.estimate().to_string(),
        ])?;
    }
    out.write("hypotheses.csv", &t.to_csv())
}

pub fn mixing_probe(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let params = s.params();
    let mut t = Table::new("mixing", 1, &["n", "alpha", "time", "disagreement", "std_error"]);
    for n in 1..=s.half_side {
        let p = point_mixing_probe(s.dim, n, s.alpha, &params, s.trials, s.seed)?;
        t.push([n as f64, s.alpha, s.alpha * n as f64, p.estimate(), p.std_error()])?;
    }
    out.write("mixing.csv", &t.to_csv())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rcx_core::Complex64;

    #[test]
    fn window_shapes() {
        let mut s = Settings::default();
        s.dim = 2;
        let (r, bc) = window(&s).unwrap();
        assert_eq!(bc, BoundaryCondition::Periodic);
        assert_eq!(r.len(), 18);
        s.boundary = "wired".into();
        let (r, bc) = window(&s).unwrap();
        assert_eq!(bc, BoundaryCondition::Wired);
        assert_eq!(r.len(), TorusGeometry::new(2, 2).unwrap().edge_window(1).len());
    }

    #[test]
    fn cap_is_enforced() {
        let mut s = Settings::default();
        s.half_side = 20;
        s.cap = 24;
        let torus = s.torus().unwrap();
        assert!(matches!(
            cap_check(&s, &torus, "torus edges"),
            Err(CliError::Core(Error::CapExceeded { .. }))
        ));
    }

    #[test]
    fn unused_complex_grid_defaults_to_origin() {
        assert_eq!(Settings::default().z_grid(), vec![Complex64::new(0.0, 0.0)]);
    }
}
