//! Brute-force references and instance generators used to check the
//! algorithms: exact minimization, a naive arc-consistency fixpoint, an
//! exhaustive frustrated-cycle enumerator and seeded random instances.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::CspInstance;
use crate::error::OracleError;
use crate::frustrated::{canonical_cycle, SignedPartitionGraph};
use crate::model::{Labeling, PairTerm, Relaxation};

/// Largest state space [`brute_min`] will enumerate.
pub const BRUTE_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub min_energy: f64,
    pub argmin: Labeling,
    /// Number of labelings enumerated.
    pub count: usize,
}

/// Calls `visit` on every labeling in lexicographic order.
pub fn for_each_labeling(domain_sizes: &[usize], mut visit: impl FnMut(&[usize])) {
    if domain_sizes.contains(&0) {
        return;
    }
    let mut x = vec![0usize; domain_sizes.len()];
    loop {
        visit(&x);
        let mut k = x.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            x[k] += 1;
            if x[k] < domain_sizes[k] {
                break;
            }
            x[k] = 0;
        }
    }
}

/// Exact minimum by enumeration; the first minimizer in lexicographic order
/// is returned.
pub fn brute_min(model: &Relaxation) -> Result<OracleResult, OracleError> {
    let total = model.num_labelings();
    if total > BRUTE_LIMIT {
        return Err(OracleError::TooLarge {
            count: total,
            limit: BRUTE_LIMIT,
        });
    }
    let mut best = f64::INFINITY;
    let mut argmin = Vec::new();
    let mut count = 0;
    for_each_labeling(model.domain_sizes(), |x| {
        count += 1;
        let e = model.evaluate_unchecked(x);
        if e < best {
            best = e;
            argmin = x.to_vec();
        }
    });
    Ok(OracleResult {
        min_energy: best,
        argmin: Labeling(argmin),
        count,
    })
}

/// Applies the two arc-consistency rules by full rescans until nothing
/// changes. Returns an instance with the resulting masks and no history.
pub fn naive_ac_fixpoint(instance: &CspInstance) -> CspInstance {
    let sizes = instance.domain_sizes().to_vec();
    let n = sizes.len();
    let mut doms: Vec<Vec<bool>> = (0..n).map(|v| instance.domain(v).to_vec()).collect();
    let mut rels: Vec<(usize, usize, Vec<bool>)> = instance
        .edges()
        .iter()
        .map(|e| (e.u, e.v, e.relation.clone()))
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for (u, v, rel) in &mut rels {
            let (du, dv) = (sizes[*u], sizes[*v]);
            for a in 0..du {
                for b in 0..dv {
                    let i = a * dv + b;
                    if rel[i] && !(doms[*u][a] && doms[*v][b]) {
                        rel[i] = false;
                        changed = true;
                    }
                }
            }
            for a in 0..du {
                if doms[*u][a] && !(0..dv).any(|b| rel[a * dv + b]) {
                    doms[*u][a] = false;
                    changed = true;
                }
            }
            for b in 0..dv {
                if doms[*v][b] && !(0..du).any(|a| rel[a * dv + b]) {
                    doms[*v][b] = false;
                    changed = true;
                }
            }
        }
    }
    let mut out = CspInstance::from_masks(sizes, doms, rels);
    out.clear_history();
    out
}

/// Every simple cycle of `graph` with at most `max_len` nodes and an odd
/// number of negative edges, as canonical projected variable cycles.
/// Cycles whose projection repeats a variable are skipped.
pub fn all_frustrated_cycles(graph: &SignedPartitionGraph, max_len: usize) -> Vec<Vec<usize>> {
    let mut found = BTreeSet::new();
    let n = graph.num_nodes();
    let mut path = Vec::new();
    let mut on_path = vec![false; n];
    for start in 0..n {
        path.push(start);
        on_path[start] = true;
        dfs(graph, start, start, 0, max_len, &mut path, &mut on_path, &mut found);
        on_path[start] = false;
        path.pop();
    }
    found.into_iter().collect()
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    graph: &SignedPartitionGraph,
    start: usize,
    at: usize,
    negatives: usize,
    max_len: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    found: &mut BTreeSet<Vec<usize>>,
) {
    for (next, edge) in graph.neighbors(at) {
        let neg = negatives + usize::from(graph.edge(edge).is_negative());
        if next == start && path.len() >= 3 {
            if neg % 2 == 1 {
                let vars: Vec<usize> = path.iter().map(|&p| graph.node(p).var).collect();
                let distinct: BTreeSet<usize> = vars.iter().copied().collect();
                if distinct.len() == vars.len() {
                    found.insert(canonical_cycle(&vars));
                }
            }
            continue;
        }
        // only extend through nodes above the start so each cycle is
        // enumerated from its smallest node
        if next <= start || on_path[next] || path.len() >= max_len {
            continue;
        }
        path.push(next);
        on_path[next] = true;
        dfs(graph, start, next, neg, max_len, path, on_path, found);
        on_path[next] = false;
        path.pop();
    }
}

/// The frustrated 3-cycle: three binary variables, zero unaries, and every
/// edge costs 1 on equal labels and 0 otherwise.
pub fn fc3() -> Relaxation {
    let eq = vec![1.0, 0.0, 0.0, 1.0];
    Relaxation::build(
        vec![2, 2, 2],
        vec![vec![0.0; 2]; 3],
        vec![
            PairTerm::new(0, 1, eq.clone()),
            PairTerm::new(0, 2, eq.clone()),
            PairTerm::new(1, 2, eq),
        ],
    )
    .expect("valid instance")
}

/// A cycle `0 - 1 - ... - (len-1) - 0` whose signed partition graph contains
/// a frustrated cycle.
///
/// Among the first two labels of each variable an edge either penalizes
/// equal labels (negative) or different labels (positive) by 1. Odd cycles
/// are all negative; even cycles get one positive edge. Every further label
/// costs 2 in the unary and in every pair. The seed permutes the labels of
/// each variable. The minimum energy is 1 and `Φ` starts at 0.
pub fn gen_frustrated(len: usize, labels: usize, seed: u64) -> Result<Relaxation, OracleError> {
    if len < 3 {
        return Err(OracleError::InvalidParameters(format!(
            "cycle length {len} is below 3"
        )));
    }
    if labels < 2 {
        return Err(OracleError::InvalidParameters(format!(
            "need at least 2 labels, got {labels}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perms: Vec<Vec<usize>> = (0..len)
        .map(|_| {
            let mut p: Vec<usize> = (0..labels).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    // perms[v][k] is the actual label that plays role k
    let unary = perms
        .iter()
        .map(|p| {
            let mut t = vec![0.0; labels];
            for (k, &a) in p.iter().enumerate() {
                if k >= 2 {
                    t[a] = 2.0;
                }
            }
            t
        })
        .collect();
    let pairs = (0..len)
        .map(|i| {
            let j = (i + 1) % len;
            let negative = len % 2 == 1 || i + 1 < len;
            let mut t = vec![0.0; labels * labels];
            for (ki, &a) in perms[i].iter().enumerate() {
                for (kj, &b) in perms[j].iter().enumerate() {
                    t[a * labels + b] = if ki >= 2 || kj >= 2 {
                        2.0
                    } else if (ki == kj) == negative {
                        1.0
                    } else {
                        0.0
                    };
                }
            }
            PairTerm::new(i, j, t)
        })
        .collect();
    Ok(Relaxation::build(vec![labels; len], unary, pairs).expect("valid instance"))
}

/// Seeded random pairwise model: 3 to 8 variables with 2 to 4 labels,
/// each edge present with probability 1/2, costs uniform in `[0, 1)`.
pub fn random_model(seed: u64) -> Relaxation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=8);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=4)).collect();
    random_model_with(&mut rng, sizes, 0.5)
}

/// Random model with the given domains and edge density.
pub fn random_model_with(rng: &mut impl Rng, sizes: Vec<usize>, density: f64) -> Relaxation {
    let n = sizes.len();
    let unary = sizes
        .iter()
        .map(|&d| (0..d).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                let costs = (0..sizes[u] * sizes[v]).map(|_| rng.gen::<f64>()).collect();
                pairs.push(PairTerm::new(u, v, costs));
            }
        }
    }
    Relaxation::build(sizes, unary, pairs).expect("valid instance")
}

/// Seeded random CSP with i.i.d. masks: 3 to 8 variables, 2 to 4 labels,
/// edge density 1/2, labels kept with probability 0.8 and pairs allowed
/// with probability 0.6.
pub fn random_csp(seed: u64) -> CspInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=8);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=4)).collect();
    let doms = sizes
        .iter()
        .map(|&d| (0..d).map(|_| rng.gen_bool(0.8)).collect())
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.5) {
                let mask = (0..sizes[u] * sizes[v]).map(|_| rng.gen_bool(0.6)).collect();
                edges.push((u, v, mask));
            }
        }
    }
    CspInstance::from_masks(sizes, doms, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{build_csp, fix_label};
    use crate::frustrated::build_signed_graph;

    #[test]
    fn brute_min_examples() {
        let zero = Relaxation::build(vec![2, 3], vec![vec![0.0; 2], vec![0.0; 3]], vec![]).unwrap();
        assert_eq!(brute_min(&zero).unwrap().min_energy, 0.0);

        let r = brute_min(&fc3()).unwrap();
        assert_eq!(r.min_energy, 1.0);
        assert_eq!(r.count, 8);
        assert_eq!(fc3().evaluate(&r.argmin).unwrap(), 1.0);

        let one = Relaxation::build(vec![3], vec![vec![3.0, 1.0, 2.0]], vec![]).unwrap();
        let r = brute_min(&one).unwrap();
        assert_eq!((r.min_energy, r.argmin.0.clone()), (1.0, vec![1]));
    }

    #[test]
    fn brute_min_refuses_large_instances() {
        let big = Relaxation::build(vec![10; 8], vec![vec![0.0; 10]; 8], vec![]).unwrap();
        assert!(matches!(brute_min(&big), Err(OracleError::TooLarge { .. })));
    }

    #[test]
    fn naive_fixpoint_examples() {
        let inst = build_csp(&fc3(), 0.5);
        assert!(naive_ac_fixpoint(&inst).same_masks(&inst));
        let fixed = fix_label(&inst, 0, 0).unwrap();
        assert!(naive_ac_fixpoint(&fixed).has_wipeout().is_some());
    }

    #[test]
    fn frustrated_generator() {
        let m = gen_frustrated(3, 2, 0).unwrap();
        assert_eq!(brute_min(&m).unwrap().min_energy, 1.0);
        assert_eq!(m.lower_bound(), 0.0);

        let m = gen_frustrated(5, 2, 7).unwrap();
        let r = brute_min(&m).unwrap();
        assert_eq!((r.min_energy, r.count), (1.0, 32));
        assert_eq!(m.lower_bound(), 0.0);

        let m = gen_frustrated(4, 2, 1).unwrap();
        let g = build_signed_graph(&m, 0.1);
        let negatives = g.edges().iter().filter(|e| e.is_negative()).count();
        let positives = g.edges().len() - negatives;
        // each variable edge gives two partition edges of each sign:
        // crossing roles flips the sign
        assert_eq!((negatives, positives), (8, 8));
        assert_eq!(all_frustrated_cycles(&g, 8), vec![vec![0, 1, 2, 3]]);

        for seed in 0..5 {
            let m = gen_frustrated(4, 3, seed).unwrap();
            assert_eq!(brute_min(&m).unwrap().min_energy, 1.0);
        }
        assert!(gen_frustrated(2, 2, 0).is_err());
        assert!(gen_frustrated(3, 1, 0).is_err());
    }

    #[test]
    fn enumerator_on_small_graphs() {
        let g = build_signed_graph(&fc3(), 0.5);
        assert_eq!(all_frustrated_cycles(&g, 6), vec![vec![0, 1, 2]]);

        // flip FC3 to penalize unequal labels: every edge positive
        let ne = vec![0.0, 1.0, 1.0, 0.0];
        let pos = Relaxation::build(
            vec![2; 3],
            vec![vec![0.0; 2]; 3],
            (0..3).map(|i| PairTerm::new(i, (i + 1) % 3, ne.clone())).collect(),
        )
        .unwrap();
        assert!(all_frustrated_cycles(&build_signed_graph(&pos, 0.5), 6).is_empty());

        // even cycle with two negative edges
        let eq = vec![1.0, 0.0, 0.0, 1.0];
        let even = Relaxation::build(
            vec![2; 4],
            vec![vec![0.0; 2]; 4],
            (0..4)
                .map(|i| PairTerm::new(i, (i + 1) % 4, if i < 2 { eq.clone() } else { ne.clone() }))
                .collect(),
        )
        .unwrap();
        assert!(all_frustrated_cycles(&build_signed_graph(&even, 0.5), 8).is_empty());
    }

    #[test]
    fn labeling_enumeration_order() {
        let mut seen = Vec::new();
        for_each_labeling(&[2, 3], |x| seen.push(x.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 0]);
        assert_eq!(seen[1], vec![0, 1]);
        assert_eq!(seen[5], vec![1, 2]);
    }
}
