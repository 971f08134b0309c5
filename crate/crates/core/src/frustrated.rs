//! Signed partition graph and frustrated-cycle search.
//!
//! Each variable contributes one node per label `a` that survives the unary
//! threshold, standing for the partition `({a}, X_v - {a})`. Two nodes at
//! adjacent variables are joined when the pair table separates the
//! partitions by more than `ε`. A cycle with an odd number of negative
//! edges is frustrated; its projection onto variables is triangulated into
//! triplets.

use std::collections::{BTreeSet, VecDeque};

use crate::error::FrustratedError;
use crate::model::Relaxation;
use crate::sac::TripletSet;
use crate::schedule::{Selection, TripletFinder};

/// The partition `({label}, X_var - {label})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Partition {
    pub var: usize,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedEdge {
    /// Node indices, `a < b`.
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

impl SignedEdge {
    pub fn is_negative(&self) -> bool {
        self.weight < 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedPartitionGraph {
    nodes: Vec<Partition>,
    edges: Vec<SignedEdge>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl SignedPartitionGraph {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Partition] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Partition {
        self.nodes[i]
    }

    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &SignedEdge {
        &self.edges[i]
    }

    /// `(neighbor, edge index)` pairs in ascending neighbor order.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency[node].iter().copied()
    }
}

/// `w(π_u, π_v)` for singleton-vs-rest partitions `{a}` at `u` and `{b}`
/// at `v`: the cheapest pair that splits the partitions minus the cheapest
/// pair that agrees with them. `costs` is row-major over `(u, v)`.
pub fn edge_weight(costs: &[f64], du: usize, dv: usize, a: usize, b: usize) -> f64 {
    let mut split = f64::INFINITY;
    let mut agree = f64::INFINITY;
    for x in 0..du {
        for y in 0..dv {
            let c = costs[x * dv + y];
            if (x == a) != (y == b) {
                split = split.min(c);
            } else {
                agree = agree.min(c);
            }
        }
    }
    split - agree
}

/// Builds the signed graph of `model` at threshold `ε`. Node ids follow
/// `(var, label)` order.
pub fn build_signed_graph(model: &Relaxation, eps: f64) -> SignedPartitionGraph {
    let mut nodes = Vec::new();
    let mut first = vec![0usize; model.num_vars() + 1];
    for v in 0..model.num_vars() {
        first[v] = nodes.len();
        let d = model.domain_size(v);
        if d < 2 {
            continue;
        }
        let costs = &model.factor(model.singleton(v)).costs;
        let cut = costs.iter().copied().fold(f64::INFINITY, f64::min) + eps;
        for (label, &c) in costs.iter().enumerate() {
            if c <= cut {
                nodes.push(Partition { var: v, label });
            }
        }
    }
    first[model.num_vars()] = nodes.len();

    let mut edges = Vec::new();
    for id in model.pairs() {
        let f = model.factor(id);
        let (u, v) = (f.scope[0], f.scope[1]);
        let (du, dv) = (model.domain_size(u), model.domain_size(v));
        for i in first[u]..first[u + 1] {
            for j in first[v]..first[v + 1] {
                let w = edge_weight(&f.costs, du, dv, nodes[i].label, nodes[j].label);
                if w.abs() > eps {
                    edges.push(SignedEdge { a: i, b: j, weight: w });
                }
            }
        }
    }
    edges.sort_by_key(|e| (e.a, e.b));
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for (k, e) in edges.iter().enumerate() {
        adjacency[e.a].push((e.b, k));
        adjacency[e.b].push((e.a, k));
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    SignedPartitionGraph {
        nodes,
        edges,
        adjacency,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrustratedCycle {
    /// Partition nodes in cycle order.
    pub nodes: Vec<usize>,
    /// Projected variable cycle, canonicalized.
    pub vars: Vec<usize>,
    pub negatives: usize,
}

impl FrustratedCycle {
    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

/// Rotates the smallest variable to the front and picks the direction with
/// the smaller second element.
pub fn canonical_cycle(vars: &[usize]) -> Vec<usize> {
    let k = vars.len();
    if k == 0 {
        return Vec::new();
    }
    let p = (0..k).min_by_key(|&i| vars[i]).unwrap();
    let fwd: Vec<usize> = (0..k).map(|i| vars[(p + i) % k]).collect();
    let bwd: Vec<usize> = (0..k).map(|i| vars[(p + k - i) % k]).collect();
    fwd.min(bwd)
}

/// Fan triangulation anchored at the first variable.
pub fn triangulate(cycle: &[usize]) -> Result<Vec<[usize; 3]>, FrustratedError> {
    if cycle.len() < 3 {
        return Err(FrustratedError::CycleTooShort { len: cycle.len() });
    }
    let mut seen = BTreeSet::new();
    for &v in cycle {
        if !seen.insert(v) {
            return Err(FrustratedError::RepeatedVariable { var: v });
        }
    }
    Ok((1..cycle.len() - 1)
        .map(|i| [cycle[0], cycle[i], cycle[i + 1]])
        .collect())
}

/// BFS tree bookkeeping: parent edge, depth and negative-edge parity.
struct Tree {
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    parity: Vec<bool>,
    visited: Vec<bool>,
}

impl Tree {
    fn new(n: usize) -> Self {
        Tree {
            parent: vec![None; n],
            depth: vec![0; n],
            parity: vec![false; n],
            visited: vec![false; n],
        }
    }

    /// BFS from `root` up to `max_depth`; returns the visited nodes in order.
    fn grow(&mut self, graph: &SignedPartitionGraph, root: usize, max_depth: usize) -> Vec<usize> {
        let mut order = vec![root];
        self.visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            if self.depth[x] == max_depth {
                continue;
            }
            for (y, e) in graph.neighbors(x) {
                if !self.visited[y] {
                    self.visited[y] = true;
                    self.parent[y] = Some((x, e));
                    self.depth[y] = self.depth[x] + 1;
                    self.parity[y] = self.parity[x] ^ graph.edge(e).is_negative();
                    order.push(y);
                    queue.push_back(y);
                }
            }
        }
        order
    }

    fn is_tree_edge(&self, e: usize, x: usize, y: usize) -> bool {
        self.parent[x].map(|p| p.1) == Some(e) || self.parent[y].map(|p| p.1) == Some(e)
    }

    /// Nodes of the fundamental cycle closed by the non-tree edge `(x, y)`.
    fn cycle_through(&self, x: usize, y: usize) -> Vec<usize> {
        let (mut left, mut right) = (vec![x], vec![y]);
        let (mut a, mut b) = (x, y);
        while a != b {
            if self.depth[a] >= self.depth[b] {
                a = self.parent[a].expect("non-root").0;
                left.push(a);
            } else {
                b = self.parent[b].expect("non-root").0;
                right.push(b);
            }
        }
        right.pop();
        right.reverse();
        left.extend(right);
        left
    }
}

/// Frustrated fundamental cycles of every tree edge set, deduplicated by
/// projected variable cycle.
fn collect_cycles(
    graph: &SignedPartitionGraph,
    tree: &Tree,
    members: &[usize],
    seen: &mut BTreeSet<Vec<usize>>,
    out: &mut Vec<FrustratedCycle>,
) {
    let mut in_tree = vec![false; graph.num_nodes()];
    for &m in members {
        in_tree[m] = true;
    }
    for &x in members {
        for (y, e) in graph.neighbors(x) {
            if y <= x || !in_tree[y] || tree.is_tree_edge(e, x, y) {
                continue;
            }
            if !(tree.parity[x] ^ tree.parity[y] ^ graph.edge(e).is_negative()) {
                continue;
            }
            let nodes = tree.cycle_through(x, y);
            let raw: Vec<usize> = nodes.iter().map(|&p| graph.node(p).var).collect();
            let distinct: BTreeSet<usize> = raw.iter().copied().collect();
            if distinct.len() != raw.len() || raw.len() < 3 {
                continue;
            }
            let vars = canonical_cycle(&raw);
            if !seen.insert(vars.clone()) {
                continue;
            }
            let negatives = count_negatives(graph, &nodes);
            out.push(FrustratedCycle {
                nodes,
                vars,
                negatives,
            });
        }
    }
}

fn count_negatives(graph: &SignedPartitionGraph, nodes: &[usize]) -> usize {
    let k = nodes.len();
    (0..k)
        .filter(|&i| {
            let (x, y) = (nodes[i], nodes[(i + 1) % k]);
            graph
                .neighbors(x)
                .find(|&(z, _)| z == y)
                .map(|(_, e)| graph.edge(e).is_negative())
                .unwrap_or(false)
        })
        .count()
}

/// One spanning BFS forest, roots taken in ascending node order; all
/// frustrated fundamental cycles.
pub fn find_cycles_fr1(graph: &SignedPartitionGraph) -> Vec<FrustratedCycle> {
    let n = graph.num_nodes();
    let mut tree = Tree::new(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for root in 0..n {
        if tree.visited[root] {
            continue;
        }
        let members = tree.grow(graph, root, usize::MAX);
        collect_cycles(graph, &tree, &members, &mut seen, &mut out);
    }
    out
}

/// A BFS tree of depth at most `d_max` from every node; all frustrated
/// fundamental cycles found in any of them.
pub fn find_cycles_fr(graph: &SignedPartitionGraph, d_max: usize) -> Vec<FrustratedCycle> {
    let n = graph.num_nodes();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for root in 0..n {
        let mut tree = Tree::new(n);
        let members = tree.grow(graph, root, d_max);
        collect_cycles(graph, &tree, &members, &mut seen, &mut out);
    }
    out
}

/// Cycles as candidate cluster sets: the fan triplets plus the cycle edges
/// as pseudo-triplets, shortest cycles first.
pub fn cycle_candidates(cycles: &[FrustratedCycle]) -> Vec<TripletSet> {
    let mut sorted: Vec<&FrustratedCycle> = cycles.iter().collect();
    sorted.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.vars.cmp(&b.vars)));
    sorted
        .into_iter()
        .filter_map(|c| {
            let tris = triangulate(&c.vars).ok()?;
            let mut set = TripletSet::new();
            for t in tris {
                set.insert_genuine(t);
            }
            let k = c.vars.len();
            for i in 0..k {
                set.insert_pseudo(c.vars[i], c.vars[(i + 1) % k]);
            }
            Some(set)
        })
        .collect()
}

/// Frustrated-cycle search plugged into the shared selection pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleFinder {
    /// One spanning BFS forest.
    Spanning,
    /// Depth-bounded BFS trees from every node.
    Local,
}

impl TripletFinder for CycleFinder {
    fn find(&self, model: &Relaxation, eps: f64, d_max: usize, seed: &Selection) -> Selection {
        let graph = build_signed_graph(model, eps);
        let cycles = match self {
            CycleFinder::Spanning => find_cycles_fr1(&graph),
            CycleFinder::Local => find_cycles_fr(&graph, d_max),
        };
        let mut out = seed.clone();
        for set in cycle_candidates(&cycles) {
            if out.triplets.is_disjoint(&set) {
                out.triplets.extend(&set);
            }
        }
        out
    }

    fn saturated(&self, model: &Relaxation, d_max: usize) -> bool {
        match self {
            CycleFinder::Spanning => true,
            CycleFinder::Local => 2 * d_max + 1 >= model.num_vars(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PairTerm;
    use crate::oracle::{all_frustrated_cycles, fc3, gen_frustrated};

    #[test]
    fn weights() {
        let eq = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(edge_weight(&eq, 2, 2, 0, 0), -1.0);
        assert_eq!(edge_weight(&eq, 2, 2, 0, 1), 1.0);
        assert_eq!(edge_weight(&[0.7; 6], 2, 3, 1, 2), 0.0);
        let ne = [0.0, 5.0, 5.0, 0.0];
        assert_eq!(edge_weight(&ne, 2, 2, 0, 0), 5.0);
    }

    #[test]
    fn weight_is_symmetric() {
        let m = crate::oracle::random_model(4);
        for id in m.pairs() {
            let f = m.factor(id);
            let (u, v) = (f.scope[0], f.scope[1]);
            let (du, dv) = (m.domain_size(u), m.domain_size(v));
            let mut t = vec![0.0; du * dv];
            for a in 0..du {
                for b in 0..dv {
                    t[b * du + a] = f.costs[a * dv + b];
                }
            }
            for a in 0..du {
                for b in 0..dv {
                    assert_eq!(edge_weight(&f.costs, du, dv, a, b), edge_weight(&t, dv, du, b, a));
                }
            }
        }
    }

    #[test]
    fn fc3_graph() {
        let g = build_signed_graph(&fc3(), 0.5);
        assert_eq!(g.num_nodes(), 6);
        assert_eq!(g.edges().len(), 12);
        let neg = g.edges().iter().filter(|e| e.is_negative()).count();
        assert_eq!(neg, 6);
        assert!(g.edges().iter().all(|e| e.weight.abs() == 1.0));

        let zero = Relaxation::build(
            vec![2, 2],
            vec![vec![0.0; 2]; 2],
            vec![PairTerm::new(0, 1, vec![0.0; 4])],
        )
        .unwrap();
        assert!(build_signed_graph(&zero, 0.1).edges().is_empty());
        assert!(build_signed_graph(&fc3(), 1.0).edges().is_empty());
    }

    #[test]
    fn fr1_on_fc3() {
        let g = build_signed_graph(&fc3(), 0.5);
        let cycles = find_cycles_fr1(&g);
        assert!(!cycles.is_empty());
        assert!(cycles.iter().all(|c| c.vars == vec![0, 1, 2] && c.negatives % 2 == 1));
    }

    #[test]
    fn fr_dedupes_across_roots() {
        let g = build_signed_graph(&fc3(), 0.5);
        let cycles = find_cycles_fr(&g, 3);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].vars, vec![0, 1, 2]);
    }

    #[test]
    fn no_cycles_without_frustration() {
        let ne = vec![0.0, 1.0, 1.0, 0.0];
        let pos = Relaxation::build(
            vec![2; 3],
            vec![vec![0.0; 2]; 3],
            (0..3).map(|i| PairTerm::new(i, (i + 1) % 3, ne.clone())).collect(),
        )
        .unwrap();
        let g = build_signed_graph(&pos, 0.5);
        // all edges positive when both partitions name the same label
        assert!(find_cycles_fr1(&g).is_empty());
        assert!(find_cycles_fr(&g, 3).is_empty());

        let two = Relaxation::build(
            vec![2; 2],
            vec![vec![0.0; 2]; 2],
            vec![PairTerm::new(0, 1, ne)],
        )
        .unwrap();
        assert!(find_cycles_fr1(&build_signed_graph(&two, 0.5)).is_empty());
    }

    #[test]
    fn depth_bound_limits_fr() {
        let m = gen_frustrated(9, 2, 3).unwrap();
        let g = build_signed_graph(&m, 0.1);
        assert!(find_cycles_fr(&g, 3).is_empty());
        let found = find_cycles_fr(&g, 5);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].vars, (0..9).collect::<Vec<_>>());
        assert_eq!(all_frustrated_cycles(&g, 20), vec![found[0].vars.clone()]);
    }

    #[test]
    fn returned_cycles_have_odd_parity() {
        for seed in 0..30 {
            let m = crate::oracle::random_model(seed);
            for eps in [0.05, 0.2] {
                let g = build_signed_graph(&m, eps);
                let oracle: BTreeSet<Vec<usize>> = all_frustrated_cycles(&g, 12).into_iter().collect();
                for c in find_cycles_fr1(&g).into_iter().chain(find_cycles_fr(&g, 3)) {
                    assert_eq!(count_negatives(&g, &c.nodes), c.negatives);
                    assert_eq!(c.negatives % 2, 1);
                    assert!(oracle.contains(&c.vars), "seed {seed}: {:?}", c.vars);
                }
            }
        }
    }

    #[test]
    fn fan_triangulation() {
        assert_eq!(triangulate(&[4, 7, 9]).unwrap(), vec![[4, 7, 9]]);
        assert_eq!(triangulate(&[0, 1, 2, 3]).unwrap().len(), 2);
        assert_eq!(
            triangulate(&[1, 2, 3, 4, 5]).unwrap(),
            vec![[1, 2, 3], [1, 3, 4], [1, 4, 5]]
        );
        assert_eq!(
            triangulate(&[1, 2]).unwrap_err(),
            FrustratedError::CycleTooShort { len: 2 }
        );
        assert_eq!(
            triangulate(&[1, 2, 1]).unwrap_err(),
            FrustratedError::RepeatedVariable { var: 1 }
        );
    }

    #[test]
    fn canonical_rotation_and_reflection() {
        assert_eq!(canonical_cycle(&[3, 1, 2]), vec![1, 2, 3]);
        assert_eq!(canonical_cycle(&[3, 2, 1]), vec![1, 2, 3]);
        assert_eq!(canonical_cycle(&[5, 0, 4, 2]), vec![0, 4, 2, 5].min(vec![0, 5, 2, 4]));
    }

    #[test]
    fn frustrated_projection_forces_an_inactive_pair() {
        for len in 3..=6 {
            let m = gen_frustrated(len, 2, len as u64).unwrap();
            let eps = 0.1;
            let g = build_signed_graph(&m, eps);
            for c in find_cycles_fr1(&g) {
                let k = c.vars.len();
                crate::oracle::for_each_labeling(&vec![2; k], |x| {
                    let violated = (0..k).any(|i| {
                        let (u, v) = (c.vars[i], c.vars[(i + 1) % k]);
                        let f = m.factor(m.pair(u, v).unwrap());
                        m.pair_cost(u, v, x[i], x[(i + 1) % k]).unwrap() > f.min_cost() + eps
                    });
                    assert!(violated);
                });
            }
        }
    }
}
