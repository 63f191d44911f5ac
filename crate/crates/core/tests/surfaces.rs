use rcx_core::coarse::{
    classify_field, extract_clusters, find_surface, locality_horizon, BoxClassifier, CoarseConfig, Mode,
    SurfaceFailure,
};
use rcx_core::glauber::ScheduleSource;
use rcx_core::{ModelParams, TorusGeometry};

#[test]
fn every_closed_cluster_sits_inside_a_verified_surface() {
    let torus = TorusGeometry::new(1, 13).unwrap();
    let config = CoarseConfig::new(1, 8.0, 12, Mode::Close).with_divisor(1.0);
    let classifier = BoxClassifier::new(torus, config, ModelParams::new(2.0, 0.01)).unwrap();
    let edges: Vec<usize> = (0..torus.edge_count()).collect();
    let mut nontrivial = 0;
    let mut open_ended = 0;
    for r in 0..60 {
        let sched = ScheduleSource::new(5, r).sample(&edges, locality_horizon(&config));
        let field = classify_field(&classifier, &sched).unwrap();
        let lattice = &field.lattice;
        let anchors: Vec<usize> = (0..lattice.base().site_count()).map(|x| lattice.site(x, 0)).collect();
        for cluster in extract_clusters(&field, &anchors) {
            if cluster.is_trivial() || cluster.truncated {
                continue;
            }
            match find_surface(&field, cluster.anchor) {
                Ok(surface) => {
                    nontrivial += 1;
                    let enclosed = surface.enclosed();
                    assert!(cluster.sites.iter().all(|s| enclosed.binary_search(s).is_ok()));
                    assert!(surface.sites.iter().all(|&s| field.is_good(s)));
                }
                Err(SurfaceFailure::Unbounded) => {
                    // bad sites absorbed on the way run into the bottom of the window
                    open_ended += 1;
                }
                Err(e) => panic!("field {r}, anchor {}: {e}", cluster.anchor),
            }
        }
    }
    assert!(nontrivial >= 50, "only {nontrivial} closed clusters");
    assert!(open_ended * 3 < nontrivial, "{open_ended} open-ended of {nontrivial}");
}
