use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::ClassificationField;
use crate::rc::config::UnionFind;

/// `C̃_x` and its spatial projection `C_x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformationCluster {
    pub anchor: usize,
    /// Sorted space-time sites.
    pub sites: Vec<usize>,
    /// Sorted coarse spatial sites.
    pub projection: Vec<usize>,
    /// The cluster reaches the deepest materialised layer, so its true extent
    /// may be larger.
    pub truncated: bool,
}

impl InformationCluster {
    pub fn size(&self) -> usize {
        self.projection.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.sites.len() == 1
    }
}

/// Components of bad sites under "graph distance at most 2".
pub fn bad_components(field: &ClassificationField) -> Vec<Vec<usize>> {
    let bad = field.bad_sites();
    let index: HashMap<usize, usize> = bad.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut uf = UnionFind::new(bad.len());
    for (i, &s) in bad.iter().enumerate() {
        for t in field.lattice.ball(s, 2) {
            if let Some(&j) = index.get(&t) {
                uf.union(i, j);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &s) in bad.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(s);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    out
}

/// Information clusters for the given anchors.
pub fn extract_clusters(field: &ClassificationField, anchors: &[usize]) -> Vec<InformationCluster> {
    let lattice = &field.lattice;
    let comps = bad_components(field);
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (c, comp) in comps.iter().enumerate() {
        for &s in comp {
            owner.insert(s, c);
        }
    }
    let dilated: Vec<BTreeSet<usize>> = comps
        .iter()
        .map(|comp| comp.iter().flat_map(|&m| lattice.ball(m, 2)).collect())
        .collect();
    let deepest = lattice.layers() - 1;
    anchors
        .iter()
        .map(|&x| {
            let mut sites = BTreeSet::from([x]);
            let seeds: BTreeSet<usize> = lattice
                .ball(x, 2)
                .into_iter()
                .filter_map(|s| owner.get(&s).copied())
                .collect();
            for c in seeds {
                sites.extend(&dilated[c]);
            }
            let sites: Vec<usize> = sites.into_iter().collect();
            let projection: BTreeSet<usize> = sites.iter().map(|&s| lattice.spatial(s)).collect();
            InformationCluster {
                anchor: x,
                truncated: sites.iter().any(|&s| lattice.layer(s) == deepest),
                projection: projection.into_iter().collect(),
                sites,
            }
        })
        .collect()
}

/// Clusters anchored at every site of the top (most recent) layer.
pub fn layer_zero_clusters(field: &ClassificationField) -> Vec<InformationCluster> {
    let anchors: Vec<usize> = (0..field.lattice.base().site_count()).collect();
    extract_clusters(field, &anchors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse::{BoxClassification, Mode, Witness};
    use crate::lattice::{CoarseLattice, SpaceTimeLattice, TorusGeometry};

    fn field(per_axis_sides: usize, layers: usize, bad: &[usize]) -> ClassificationField {
        let torus = TorusGeometry::new(1, (3 * per_axis_sides - 1) / 2).unwrap();
        let lattice = SpaceTimeLattice::new(CoarseLattice::new(torus, 1).unwrap(), 4.0, layers).unwrap();
        let boxes = (0..lattice.site_count())
            .map(|s| {
                let good = !bad.contains(&s);
                BoxClassification {
                    site: s,
                    mode: Mode::Close,
                    good,
                    witness: if good { Witness::None } else { Witness::Coalescence },
                }
            })
            .collect();
        ClassificationField { lattice, boxes }
    }

    #[test]
    fn all_good_gives_singletons() {
        let f = field(11, 6, &[]);
        for c in layer_zero_clusters(&f) {
            assert_eq!(c.sites, vec![c.anchor]);
            assert_eq!(c.projection, vec![c.anchor]);
            assert!(!c.truncated);
        }
    }

    #[test]
    fn single_bad_site_gives_its_ball() {
        let f = field(11, 8, &[]);
        let x = f.lattice.site(5, 3);
        let f = field(11, 8, &[x]);
        let c = &extract_clusters(&f, &[x])[0];
        assert_eq!(c.sites, f.lattice.ball(x, 2));
        assert_eq!(c.sites.len(), 13);
        assert_eq!(c.projection, vec![3, 4, 5, 6, 7]);
        // anchors farther than 2 away see nothing
        let far = f.lattice.site(9, 3);
        assert_eq!(extract_clusters(&f, &[far])[0].sites, vec![far]);
    }

    #[test]
    fn bad_sites_at_distance_two_merge() {
        let base = field(11, 8, &[]);
        let a = base.lattice.site(3, 3);
        let b = base.lattice.site(4, 4);
        let f = field(11, 8, &[a, b]);
        assert_eq!(bad_components(&f).len(), 1);
        let c = &extract_clusters(&f, &[a])[0];
        let mut expected: Vec<usize> = base.lattice.ball(a, 2);
        expected.extend(base.lattice.ball(b, 2));
        expected.sort_unstable();
        expected.dedup();
        assert_eq!(c.sites, expected);
        // distance three stays separate
        let far = base.lattice.site(6, 3);
        assert_eq!(bad_components(&field(11, 8, &[a, far])).len(), 2);
    }

    #[test]
    fn anchor_always_included_and_truncation_flagged() {
        let base = field(5, 3, &[]);
        let x = base.lattice.site(0, 0);
        let deep = base.lattice.site(1, 1);
        let f = field(5, 3, &[deep]);
        let c = &extract_clusters(&f, &[x])[0];
        assert!(c.sites.contains(&x));
        assert!(c.truncated);
    }
}
