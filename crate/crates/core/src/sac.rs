//! Triplet search by singleton arc consistency probes.
//!
//! For every node `r` and label `s` that survive the arc-consistency
//! closure, `r` is fixed to `s` inside a ball of radius `d_max` and AC is
//! run again. A wipeout yields a minimal deletion trace, and each deletion
//! `(v_i, u_i)` contributes the cluster `{r, u_i, v_i}`: a genuine triplet
//! when the three variables are distinct, a pseudo-triplet (an edge) when
//! `r` is one of them.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::csp::{ac3, build_csp, fix_label, minimal_trace, restrict_to_ball, CspInstance, DeletionTrace};
use crate::model::Relaxation;
use crate::schedule::{Selection, TripletFinder};

/// Genuine triplets plus pseudo-triplets `{r, v}` (edges touched by a
/// probe). Pseudo-triplets only take part in disjointness tests.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripletSet {
    genuine: BTreeSet<[usize; 3]>,
    pseudo: BTreeSet<[usize; 2]>,
}

impl TripletSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `{x, y, z}` as a genuine triplet, or as a pseudo-triplet if
    /// only two variables are distinct. Returns false for a single variable.
    pub fn insert_cluster(&mut self, x: usize, y: usize, z: usize) -> bool {
        let set: BTreeSet<usize> = [x, y, z].into_iter().collect();
        let v: Vec<usize> = set.into_iter().collect();
        match v.len() {
            3 => {
                self.genuine.insert([v[0], v[1], v[2]]);
                true
            }
            2 => {
                self.pseudo.insert([v[0], v[1]]);
                true
            }
            _ => false,
        }
    }

    pub fn insert_genuine(&mut self, t: [usize; 3]) {
        let mut t = t;
        t.sort_unstable();
        self.genuine.insert(t);
    }

    pub fn insert_pseudo(&mut self, u: usize, v: usize) {
        self.pseudo.insert([u.min(v), u.max(v)]);
    }

    pub fn genuine(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.genuine.iter().copied()
    }

    pub fn pseudo(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        self.pseudo.iter().copied()
    }

    pub fn num_genuine(&self) -> usize {
        self.genuine.len()
    }

    pub fn num_pseudo(&self) -> usize {
        self.pseudo.len()
    }

    pub fn contains_genuine(&self, t: [usize; 3]) -> bool {
        let mut t = t;
        t.sort_unstable();
        self.genuine.contains(&t)
    }

    pub fn contains_pseudo(&self, u: usize, v: usize) -> bool {
        self.pseudo.contains(&[u.min(v), u.max(v)])
    }

    pub fn is_empty(&self) -> bool {
        self.genuine.is_empty() && self.pseudo.is_empty()
    }

    /// No shared genuine triplet and no shared pseudo-triplet.
    pub fn is_disjoint(&self, other: &TripletSet) -> bool {
        self.genuine.is_disjoint(&other.genuine) && self.pseudo.is_disjoint(&other.pseudo)
    }

    pub fn extend(&mut self, other: &TripletSet) {
        self.genuine.extend(other.genuine.iter().copied());
        self.pseudo.extend(other.pseudo.iter().copied());
    }
}

/// A probe that wiped out, kept so that a certificate can be built later.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeWitness {
    pub r: usize,
    pub s: usize,
    pub eps: f64,
    /// Minimal trace ending with the deletion of `s` at `r`.
    pub trace: DeletionTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub clusters: TripletSet,
    pub trace: Option<DeletionTrace>,
}

/// Clusters contributed by the records of a minimal trace rooted at `r`.
pub fn clusters_of(trace: &DeletionTrace, r: usize) -> TripletSet {
    let mut set = TripletSet::new();
    for d in &trace.records {
        if let Some(u) = d.via {
            set.insert_cluster(r, u, d.var);
        }
    }
    set
}

/// Fixes `r` to `s` inside the radius-`d_max` ball of `closure` and runs AC.
/// The clusters are empty unless the probe wipes out.
pub fn probe(closure: &CspInstance, r: usize, s: usize, d_max: usize) -> ProbeResult {
    let ball = restrict_to_ball(closure, r, d_max);
    let empty = ProbeResult {
        clusters: TripletSet::new(),
        trace: None,
    };
    let Ok(fixed) = fix_label(&ball, r, s) else {
        return empty;
    };
    let (_, trace) = ac3(&fixed);
    if !trace.is_wipeout() {
        return empty;
    }
    let min = minimal_trace(&trace).expect("wipeout trace");
    ProbeResult {
        clusters: clusters_of(&min, r),
        trace: Some(min),
    }
}

/// Per-node result of [`find_triplets`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProbes {
    pub r: usize,
    /// `𝒴_r` in the closure.
    pub domain: Vec<usize>,
    /// `ℒ_r`: labels whose probe wiped out.
    pub covered: Vec<usize>,
    /// `𝒜_r`, the union of the per-label clusters.
    pub clusters: TripletSet,
    pub witnesses: Vec<ProbeWitness>,
}

impl NodeProbes {
    /// `ℒ_r = 𝒴_r ≠ ∅`.
    pub fn full_coverage(&self) -> bool {
        !self.domain.is_empty() && self.covered.len() == self.domain.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FindResult {
    pub selection: Selection,
    pub nodes: Vec<NodeProbes>,
    /// Node ids in the order they were offered to the greedy pass.
    pub order: Vec<usize>,
    /// Nodes whose clusters were accepted.
    pub chosen: Vec<usize>,
    /// The closure itself wiped out, so no probe was run.
    pub closure_wipeout: bool,
}

/// Runs every probe on the AC closure of `CSP_ε(θ)` and greedily selects
/// pairwise disjoint per-node cluster sets, starting from `seed`.
pub fn find_triplets(model: &Relaxation, eps: f64, d_max: usize, seed: &Selection) -> FindResult {
    let (closure, trace) = ac3(&build_csp(model, eps));
    let n = model.num_vars();
    if trace.is_wipeout() {
        return FindResult {
            selection: seed.clone(),
            nodes: Vec::new(),
            order: Vec::new(),
            chosen: Vec::new(),
            closure_wipeout: true,
        };
    }
    let jobs: Vec<(usize, usize)> = (0..n)
        .flat_map(|r| closure.domain_labels(r).into_iter().map(move |s| (r, s)))
        .collect();
    let results: Vec<ProbeResult> = jobs
        .par_iter()
        .map(|&(r, s)| probe(&closure, r, s, d_max))
        .collect();

    let mut nodes: Vec<NodeProbes> = (0..n)
        .map(|r| NodeProbes {
            r,
            domain: closure.domain_labels(r),
            covered: Vec::new(),
            clusters: TripletSet::new(),
            witnesses: Vec::new(),
        })
        .collect();
    for (&(r, s), res) in jobs.iter().zip(results) {
        if res.clusters.is_empty() {
            continue;
        }
        let node = &mut nodes[r];
        node.covered.push(s);
        node.clusters.extend(&res.clusters);
        node.witnesses.push(ProbeWitness {
            r,
            s,
            eps,
            trace: res.trace.expect("wipeout trace"),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&r| {
        let node = &nodes[r];
        (!node.full_coverage(), node.clusters.num_genuine(), r)
    });

    let mut selection = seed.clone();
    let mut chosen = Vec::new();
    for &r in &order {
        let node = &nodes[r];
        if node.clusters.is_empty() || !selection.triplets.is_disjoint(&node.clusters) {
            continue;
        }
        selection.triplets.extend(&node.clusters);
        selection.witnesses.extend(node.witnesses.iter().cloned());
        if node.full_coverage() {
            selection.full_coverage.push(r);
        }
        chosen.push(r);
    }
    FindResult {
        selection,
        nodes,
        order,
        chosen,
        closure_wipeout: false,
    }
}

/// Triplet search by SAC probes.
#[derive(Debug, Clone, Copy, Default)]
pub struct SacFinder;

impl TripletFinder for SacFinder {
    fn find(&self, model: &Relaxation, eps: f64, d_max: usize, seed: &Selection) -> Selection {
        find_triplets(model, eps, d_max, seed).selection
    }

    fn saturated(&self, model: &Relaxation, d_max: usize) -> bool {
        d_max + 1 >= model.num_vars()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PairTerm;
    use crate::oracle::fc3;

    fn two_fc3() -> Relaxation {
        let eq = vec![1.0, 0.0, 0.0, 1.0];
        let mut pairs = Vec::new();
        for base in [0, 3] {
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                pairs.push(PairTerm::new(base + i, base + j, eq.clone()));
            }
        }
        Relaxation::build(vec![2; 6], vec![vec![0.0; 2]; 6], pairs).unwrap()
    }

    #[test]
    fn fc3_probe_clusters() {
        let (closure, _) = ac3(&build_csp(&fc3(), 0.5));
        let res = probe(&closure, 0, 0, 3);
        let c = res.clusters;
        assert_eq!(c.genuine().collect::<Vec<_>>(), vec![[0, 1, 2]]);
        assert_eq!(c.pseudo().collect::<Vec<_>>(), vec![[0, 1], [0, 2]]);
    }

    #[test]
    fn consistent_probes_are_empty() {
        let single = Relaxation::build(
            vec![2, 2],
            vec![vec![0.0; 2]; 2],
            vec![PairTerm::new(0, 1, vec![0.0; 4])],
        )
        .unwrap();
        let (closure, _) = ac3(&build_csp(&single, 0.1));
        for r in 0..2 {
            for s in 0..2 {
                assert!(probe(&closure, r, s, 3).clusters.is_empty());
            }
        }
        let (wide, _) = ac3(&build_csp(&fc3(), 2.0));
        for r in 0..3 {
            for s in 0..2 {
                assert!(probe(&wide, r, s, 3).clusters.is_empty());
            }
        }
    }

    #[test]
    fn fc3_selects_one_node() {
        let res = find_triplets(&fc3(), 0.5, 3, &Selection::default());
        assert!(res.nodes.iter().all(NodeProbes::full_coverage));
        assert_eq!(res.chosen.len(), 1);
        assert_eq!(res.selection.triplets.genuine().collect::<Vec<_>>(), vec![[0, 1, 2]]);
        assert_eq!(res.selection.full_coverage, res.chosen);
    }

    #[test]
    fn tree_yields_nothing() {
        // a satisfiable path; CSP built from raw costs at small ε
        let m = Relaxation::build(
            vec![2; 4],
            vec![vec![0.0, 0.5]; 4],
            (0..3)
                .map(|i| PairTerm::new(i, i + 1, vec![0.0, 1.0, 1.0, 0.0]))
                .collect(),
        )
        .unwrap();
        let res = find_triplets(&m, 0.1, 3, &Selection::default());
        assert!(res.selection.triplets.is_empty());
    }

    #[test]
    fn disjoint_copies_both_selected() {
        let res = find_triplets(&two_fc3(), 0.5, 3, &Selection::default());
        let got: Vec<_> = res.selection.triplets.genuine().collect();
        assert_eq!(got, vec![[0, 1, 2], [3, 4, 5]]);
    }

    #[test]
    fn greedy_sets_are_disjoint() {
        for seed in 0..40 {
            let m = crate::oracle::random_model(seed);
            let res = find_triplets(&m, 0.3, 3, &Selection::default());
            let mut acc = TripletSet::new();
            for &r in &res.chosen {
                let c = &res.nodes[r].clusters;
                assert!(acc.is_disjoint(c));
                acc.extend(c);
            }
            assert_eq!(acc, res.selection.triplets);
            let again = find_triplets(&m, 0.3, 3, &Selection::default());
            assert_eq!(again, res);
        }
    }

    #[test]
    fn order_puts_full_coverage_first() {
        for seed in 0..40 {
            let m = crate::oracle::random_model(100 + seed);
            let res = find_triplets(&m, 0.3, 3, &Selection::default());
            let flags: Vec<bool> = res.order.iter().map(|&r| res.nodes[r].full_coverage()).collect();
            assert!(flags.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn cluster_set_ops() {
        let mut a = TripletSet::new();
        assert!(a.insert_cluster(2, 0, 1));
        assert!(a.insert_cluster(0, 0, 3));
        assert!(!a.insert_cluster(1, 1, 1));
        assert!(a.contains_genuine([1, 2, 0]));
        assert!(a.contains_pseudo(3, 0));
        let mut b = TripletSet::new();
        b.insert_pseudo(0, 3);
        assert!(!a.is_disjoint(&b));
        let mut c = TripletSet::new();
        c.insert_genuine([4, 3, 5]);
        assert!(a.is_disjoint(&c));
    }
}
