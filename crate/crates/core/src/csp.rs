//! The 2-CSP `CSP_ε^{≤2}(θ)`, arc consistency with deletion traces, and
//! minimal inconsistent sub-traces.
//!
//! Every label removal is recorded as a [`Deletion`] together with the
//! earlier deletions that destroyed its last supports. Labels that are
//! missing from the initial domains are recorded too (kind
//! [`DeletionKind::Initial`]) so that cause chains never dangle. Labels
//! removed by [`fix_label`] are not recorded: they are the premise of a
//! probe, not a consequence.

use std::collections::VecDeque;

use crate::error::CspError;
use crate::model::Relaxation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeletionKind {
    /// Absent from the domain when the instance was built.
    Initial,
    /// Removed by a revise step for lack of support.
    Propagated,
    /// Appended after a wipeout away from the probe root, walking back to it.
    Extension,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deletion {
    /// Global position in the instance history.
    pub index: usize,
    pub var: usize,
    pub label: usize,
    /// Neighbor whose edge lost the last support (`u_i`); `None` for
    /// initial records.
    pub via: Option<usize>,
    /// Indices of deleted `via`-labels `b` with `(b, label)` initially
    /// allowed, ascending.
    pub causes: Vec<usize>,
    pub kind: DeletionKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CspEdge {
    pub u: usize,
    pub v: usize,
    /// Pair mask at construction, row-major `a * |X_v| + b`.
    pub active: Vec<bool>,
    /// Current pair mask.
    pub relation: Vec<bool>,
}

impl CspEdge {
    fn idx(&self, dv: usize, a: usize, b: usize) -> usize {
        a * dv + b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CspInstance {
    domain_sizes: Vec<usize>,
    included: Vec<bool>,
    domains: Vec<Vec<bool>>,
    edges: Vec<CspEdge>,
    adjacency: Vec<Vec<usize>>,
    history: Vec<Deletion>,
    record_of: Vec<Vec<Option<usize>>>,
    root: Option<(usize, usize)>,
}

/// Ordered deletion records produced by [`ac3`] or [`minimal_trace`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeletionTrace {
    /// Records in deletion order. For [`ac3`] output this is the whole
    /// history, so every cause index resolves.
    pub records: Vec<Deletion>,
    /// Position in `records` of the first deletion made by this run.
    pub first_new: usize,
    /// Variable whose domain became empty.
    pub wipeout: Option<usize>,
    /// Probe root `(r, s)` if a label was fixed.
    pub root: Option<(usize, usize)>,
}

impl DeletionTrace {
    pub fn new_records(&self) -> &[Deletion] {
        &self.records[self.first_new..]
    }

    pub fn is_wipeout(&self) -> bool {
        self.wipeout.is_some()
    }

    pub fn get(&self, index: usize) -> Option<&Deletion> {
        self.records
            .binary_search_by_key(&index, |d| d.index)
            .ok()
            .map(|p| &self.records[p])
    }

    /// `(var, label, via)` of the new records, for compact assertions.
    pub fn steps(&self) -> Vec<(usize, usize, Option<usize>)> {
        self.new_records()
            .iter()
            .map(|d| (d.var, d.label, d.via))
            .collect()
    }
}

impl CspInstance {
    /// Builds an instance from raw masks. Labels missing from `domains`
    /// become initial records. Edges are normalized to `u < v` and sorted.
    pub fn from_masks(
        domain_sizes: Vec<usize>,
        domains: Vec<Vec<bool>>,
        edges: Vec<(usize, usize, Vec<bool>)>,
    ) -> Self {
        let n = domain_sizes.len();
        let mut norm: Vec<CspEdge> = edges
            .into_iter()
            .map(|(u, v, mask)| {
                if u < v {
                    CspEdge {
                        u,
                        v,
                        relation: mask.clone(),
                        active: mask,
                    }
                } else {
                    let (du, dv) = (domain_sizes[u], domain_sizes[v]);
                    let mut t = vec![false; mask.len()];
                    for a in 0..du {
                        for b in 0..dv {
                            t[b * du + a] = mask[a * dv + b];
                        }
                    }
                    CspEdge {
                        u: v,
                        v: u,
                        relation: t.clone(),
                        active: t,
                    }
                }
            })
            .collect();
        norm.sort_by_key(|e| (e.u, e.v));
        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in norm.iter().enumerate() {
            adjacency[e.u].push(i);
            adjacency[e.v].push(i);
        }
        let mut inst = CspInstance {
            record_of: domain_sizes.iter().map(|&d| vec![None; d]).collect(),
            domain_sizes,
            included: vec![true; n],
            domains,
            edges: norm,
            adjacency,
            history: Vec::new(),
            root: None,
        };
        for v in 0..n {
            for a in 0..inst.domain_sizes[v] {
                if !inst.domains[v][a] {
                    inst.push_record(v, a, None, Vec::new(), DeletionKind::Initial);
                }
            }
        }
        inst
    }

    pub fn num_vars(&self) -> usize {
        self.domain_sizes.len()
    }

    pub fn domain_sizes(&self) -> &[usize] {
        &self.domain_sizes
    }

    pub fn domain(&self, v: usize) -> &[bool] {
        &self.domains[v]
    }

    pub fn domain_labels(&self, v: usize) -> Vec<usize> {
        (0..self.domain_sizes[v])
            .filter(|&a| self.domains[v][a])
            .collect()
    }

    pub fn edges(&self) -> &[CspEdge] {
        &self.edges
    }

    pub fn edge(&self, u: usize, v: usize) -> Option<&CspEdge> {
        let (lo, hi) = (u.min(v), u.max(v));
        self.adjacency[lo]
            .iter()
            .map(|&i| &self.edges[i])
            .find(|e| e.u == lo && e.v == hi)
    }

    /// Whether `(a at u, b at v)` is in the current relation.
    pub fn allowed(&self, u: usize, v: usize, a: usize, b: usize) -> bool {
        match self.edge(u, v) {
            Some(e) if e.u == u => e.relation[e.idx(self.domain_sizes[v], a, b)],
            Some(e) => e.relation[e.idx(self.domain_sizes[u], b, a)],
            None => true,
        }
    }

    pub fn is_included(&self, v: usize) -> bool {
        self.included[v]
    }

    pub fn num_included(&self) -> usize {
        self.included.iter().filter(|&&b| b).count()
    }

    pub fn history(&self) -> &[Deletion] {
        &self.history
    }

    pub fn root(&self) -> Option<(usize, usize)> {
        self.root
    }

    pub(crate) fn clear_history(&mut self) {
        self.history.clear();
        for r in &mut self.record_of {
            r.fill(None);
        }
    }

    pub fn has_wipeout(&self) -> Option<usize> {
        (0..self.num_vars()).find(|&v| self.included[v] && self.domains[v].iter().all(|&b| !b))
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(move |&i| {
            let e = &self.edges[i];
            if e.u == v {
                e.v
            } else {
                e.u
            }
        })
    }

    /// Masks only, ignoring history; used to compare closures.
    pub fn same_masks(&self, other: &CspInstance) -> bool {
        self.domains == other.domains
            && self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.u == b.u && a.v == b.v && a.relation == b.relation)
    }

    /// `𝒴 ⪯ 𝒴'` on domains and relations.
    pub fn is_subinstance_of(&self, other: &CspInstance) -> bool {
        let doms = self
            .domains
            .iter()
            .zip(&other.domains)
            .all(|(a, b)| a.iter().zip(b).all(|(&x, &y)| !x || y));
        doms && self.edges.iter().zip(&other.edges).all(|(a, b)| {
            a.relation.iter().zip(&b.relation).all(|(&x, &y)| !x || y)
        })
    }

    fn push_record(
        &mut self,
        var: usize,
        label: usize,
        via: Option<usize>,
        causes: Vec<usize>,
        kind: DeletionKind,
    ) -> usize {
        let index = self.history.len();
        self.history.push(Deletion {
            index,
            var,
            label,
            via,
            causes,
            kind,
        });
        self.record_of[var][label] = Some(index);
        index
    }

    /// Removes label `a` from `v` and every pair that uses it.
    fn remove_label(&mut self, v: usize, a: usize) {
        self.domains[v][a] = false;
        for &i in &self.adjacency[v] {
            let e = &mut self.edges[i];
            let (du, dv) = (self.domain_sizes[e.u], self.domain_sizes[e.v]);
            if e.u == v {
                for b in 0..dv {
                    e.relation[a * dv + b] = false;
                }
            } else {
                for b in 0..du {
                    e.relation[b * dv + a] = false;
                }
            }
        }
    }

    /// Recorded deletions of `u`-labels that were initially allowed with
    /// `a` at `v`.
    fn causes_for(&self, edge: usize, u: usize, v: usize, a: usize) -> Vec<usize> {
        let e = &self.edges[edge];
        let mut causes: Vec<usize> = (0..self.domain_sizes[u])
            .filter(|&b| {
                let idx = if e.u == u {
                    b * self.domain_sizes[v] + a
                } else {
                    a * self.domain_sizes[u] + b
                };
                e.active[idx] && !self.domains[u][b]
            })
            .filter_map(|b| self.record_of[u][b])
            .collect();
        causes.sort_unstable();
        causes
    }

    fn supported(&self, edge: usize, u: usize, v: usize, a: usize) -> bool {
        let e = &self.edges[edge];
        (0..self.domain_sizes[u]).any(|b| {
            let idx = if e.u == u {
                b * self.domain_sizes[v] + a
            } else {
                a * self.domain_sizes[u] + b
            };
            e.relation[idx]
        })
    }

    /// Rule 1 applied everywhere: drop pairs whose endpoint label is gone.
    fn prune_relations(&mut self) {
        for e in &mut self.edges {
            let dv = self.domain_sizes[e.v];
            for (idx, r) in e.relation.iter_mut().enumerate() {
                if *r && !(self.domains[e.u][idx / dv] && self.domains[e.v][idx % dv]) {
                    *r = false;
                }
            }
        }
    }
}

/// Builds `CSP_ε^{≤2}(θ)`: a tuple is allowed iff its cost is at most the
/// table minimum plus `ε`. Factors with three or more variables are ignored.
pub fn build_csp(model: &Relaxation, eps: f64) -> CspInstance {
    let n = model.num_vars();
    let domains = (0..n)
        .map(|v| threshold(&model.factor(model.singleton(v)).costs, eps))
        .collect();
    let edges = model
        .pairs()
        .into_iter()
        .map(|id| {
            let f = model.factor(id);
            (f.scope[0], f.scope[1], threshold(&f.costs, eps))
        })
        .collect();
    CspInstance::from_masks(model.domain_sizes().to_vec(), domains, edges)
}

fn threshold(costs: &[f64], eps: f64) -> Vec<bool> {
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let cut = min + eps;
    costs.iter().map(|&c| c <= cut).collect()
}

/// Keeps the variables within graph distance `d_max` of `r`; edges with an
/// endpoint outside are dropped. Variable ids and history are unchanged.
pub fn restrict_to_ball(instance: &CspInstance, r: usize, d_max: usize) -> CspInstance {
    let n = instance.num_vars();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    if instance.included[r] {
        dist[r] = 0;
        queue.push_back(r);
    }
    while let Some(x) = queue.pop_front() {
        if dist[x] == d_max {
            continue;
        }
        for y in instance.neighbors(x) {
            if instance.included[y] && dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    let included: Vec<bool> = dist.iter().map(|&d| d != usize::MAX).collect();
    let edges: Vec<CspEdge> = instance
        .edges
        .iter()
        .filter(|e| included[e.u] && included[e.v])
        .cloned()
        .collect();
    let mut adjacency = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        adjacency[e.u].push(i);
        adjacency[e.v].push(i);
    }
    CspInstance {
        domain_sizes: instance.domain_sizes.clone(),
        included,
        domains: instance.domains.clone(),
        edges,
        adjacency,
        history: instance.history.clone(),
        record_of: instance.record_of.clone(),
        root: instance.root,
    }
}

/// Sets `𝒴_r = {s}`.
pub fn fix_label(instance: &CspInstance, r: usize, s: usize) -> Result<CspInstance, CspError> {
    if r >= instance.num_vars() || !instance.included[r] {
        return Err(CspError::UnknownVariable { var: r });
    }
    if s >= instance.domain_sizes[r] || !instance.domains[r][s] {
        return Err(CspError::LabelNotInDomain { var: r, label: s });
    }
    let mut out = instance.clone();
    for a in 0..out.domain_sizes[r] {
        if a != s && out.domains[r][a] {
            out.remove_label(r, a);
        }
    }
    out.root = Some((r, s));
    Ok(out)
}

/// Options for [`ac3_with`].
#[derive(Debug, Clone, Copy)]
pub struct AcOptions {
    /// Stop as soon as a domain empties.
    pub stop_on_wipeout: bool,
}

impl Default for AcOptions {
    fn default() -> Self {
        AcOptions {
            stop_on_wipeout: true,
        }
    }
}

/// AC3 with a FIFO queue of directed arcs, stopping at the first wipeout.
/// On a wipeout away from a fixed root the trace is extended back to the
/// root along a shortest path, ending with the deletion of the root label.
pub fn ac3(instance: &CspInstance) -> (CspInstance, DeletionTrace) {
    ac3_with(instance, AcOptions::default())
}

pub fn ac3_with(instance: &CspInstance, options: AcOptions) -> (CspInstance, DeletionTrace) {
    let mut inst = instance.clone();
    let first_new = inst.history.len();
    inst.prune_relations();

    // arc (u, v, edge): revise the domain of v against u
    let mut arcs: Vec<(usize, usize, usize)> = Vec::with_capacity(2 * inst.edges.len());
    for (i, e) in inst.edges.iter().enumerate() {
        arcs.push((e.u, e.v, i));
        arcs.push((e.v, e.u, i));
    }
    arcs.sort_unstable();
    let arc_slot = |u: usize, e: &CspEdge| if e.u == u { 0 } else { 1 };
    let mut queued = vec![[false; 2]; inst.edges.len()];
    let mut queue: VecDeque<(usize, usize, usize)> = VecDeque::with_capacity(arcs.len());
    for &(u, v, i) in &arcs {
        queued[i][arc_slot(u, &inst.edges[i])] = true;
        queue.push_back((u, v, i));
    }

    let mut wipeout = inst.has_wipeout();
    while wipeout.is_none() || !options.stop_on_wipeout {
        let Some((u, v, i)) = queue.pop_front() else {
            break;
        };
        queued[i][arc_slot(u, &inst.edges[i])] = false;
        let mut changed = false;
        for a in 0..inst.domain_sizes[v] {
            if inst.domains[v][a] && !inst.supported(i, u, v, a) {
                let causes = inst.causes_for(i, u, v, a);
                inst.remove_label(v, a);
                inst.push_record(v, a, Some(u), causes, DeletionKind::Propagated);
                changed = true;
            }
        }
        if !changed {
            continue;
        }
        if inst.domains[v].iter().all(|&b| !b) && wipeout.is_none() {
            wipeout = Some(v);
            if options.stop_on_wipeout {
                break;
            }
        }
        for &j in &inst.adjacency[v] {
            let e = &inst.edges[j];
            let w = if e.u == v { e.v } else { e.u };
            if w == u {
                continue;
            }
            let slot = arc_slot(v, e);
            if !queued[j][slot] {
                queued[j][slot] = true;
                queue.push_back((v, w, j));
            }
        }
    }

    if let (Some(w), Some((r, _))) = (wipeout, inst.root) {
        if w != r && inst.domains[r].iter().any(|&b| b) {
            extend_to_root(&mut inst, w, r);
        }
    }

    let trace = DeletionTrace {
        records: inst.history.clone(),
        first_new,
        wipeout,
        root: inst.root,
    };
    (inst, trace)
}

/// Deletes, along a shortest path from the emptied vertex `w` back to `r`,
/// every remaining label; each is unsupported because its predecessor on
/// the path is already empty.
fn extend_to_root(inst: &mut CspInstance, w: usize, r: usize) {
    let n = inst.num_vars();
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::from([r]);
    parent[r] = r;
    while let Some(x) = queue.pop_front() {
        if x == w {
            break;
        }
        let next: Vec<usize> = inst.neighbors(x).collect();
        for y in next {
            if inst.included[y] && parent[y] == usize::MAX {
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    if parent[w] == usize::MAX {
        return;
    }
    let mut prev = w;
    let mut cur = parent[w];
    loop {
        let edge = inst.adjacency[cur]
            .iter()
            .copied()
            .find(|&i| {
                let e = &inst.edges[i];
                (e.u == cur && e.v == prev) || (e.v == cur && e.u == prev)
            })
            .expect("path edge exists");
        for a in 0..inst.domain_sizes[cur] {
            if inst.domains[cur][a] {
                let causes = inst.causes_for(edge, prev, cur, a);
                inst.remove_label(cur, a);
                inst.push_record(cur, a, Some(prev), causes, DeletionKind::Extension);
            }
        }
        if cur == r {
            break;
        }
        prev = cur;
        cur = parent[cur];
    }
}

/// Backward reachability through cause links from the deletions that
/// emptied the wipeout variable. Returns the reachable records in their
/// original order, indices preserved.
pub fn minimal_trace(trace: &DeletionTrace) -> Result<DeletionTrace, CspError> {
    let target = match (trace.root, trace.wipeout) {
        (Some((r, _)), Some(_)) => r,
        (None, Some(w)) => w,
        _ => return Err(CspError::NoWipeout),
    };
    let mut keep = vec![false; trace.records.len()];
    let pos = |index: usize| {
        trace
            .records
            .binary_search_by_key(&index, |d| d.index)
            .expect("cause index resolves")
    };
    let mut stack: Vec<usize> = trace
        .records
        .iter()
        .enumerate()
        .filter(|(_, d)| d.var == target)
        .map(|(p, _)| p)
        .collect();
    if stack.is_empty() {
        return Err(CspError::NoWipeout);
    }
    while let Some(p) = stack.pop() {
        if keep[p] {
            continue;
        }
        keep[p] = true;
        for &c in &trace.records[p].causes {
            stack.push(pos(c));
        }
    }
    let records: Vec<Deletion> = trace
        .records
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(d, _)| d.clone())
        .collect();
    let first_new = trace
        .records
        .iter()
        .zip(&keep)
        .take(trace.first_new)
        .filter(|(_, &k)| k)
        .count();
    Ok(DeletionTrace {
        records,
        first_new,
        wipeout: trace.wipeout,
        root: trace.root,
    })
}

/// Replays `trace` on the unreduced instance: every label starts present
/// except the fixed-away labels of the root, pairs start at their initial
/// masks, and each propagated record must be unsupported when applied.
/// Returns true iff every step is valid and the target variable ends empty.
pub fn replay_derives_wipeout(instance: &CspInstance, trace: &DeletionTrace) -> bool {
    let mut doms: Vec<Vec<bool>> = instance
        .domain_sizes
        .iter()
        .map(|&d| vec![true; d])
        .collect();
    if let Some((r, s)) = trace.root {
        for (a, x) in doms[r].iter_mut().enumerate() {
            *x = a == s;
        }
    }
    for d in &trace.records {
        if let Some(u) = d.via {
            let Some(e) = instance.edge(u, d.var) else {
                return false;
            };
            let supported = (0..instance.domain_sizes[u]).any(|b| {
                let idx = if e.u == u {
                    b * instance.domain_sizes[d.var] + d.label
                } else {
                    d.label * instance.domain_sizes[u] + b
                };
                doms[u][b] && e.active[idx]
            });
            if supported || !doms[d.var][d.label] {
                return false;
            }
        }
        doms[d.var][d.label] = false;
    }
    let target = match (trace.root, trace.wipeout) {
        (Some((r, _)), _) => r,
        (None, Some(w)) => w,
        (None, None) => return false,
    };
    doms[target].iter().all(|&b| !b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{fc3, naive_ac_fixpoint};

    fn path5() -> CspInstance {
        let full = vec![true; 4];
        CspInstance::from_masks(
            vec![2; 5],
            vec![vec![true; 2]; 5],
            (0..4).map(|i| (i, i + 1, full.clone())).collect(),
        )
    }

    #[test]
    fn infinite_eps_gives_full_masks() {
        let inst = build_csp(&fc3(), f64::INFINITY);
        assert!(inst.domains.iter().flatten().all(|&b| b));
        assert!(inst.edges.iter().all(|e| e.relation.iter().all(|&b| b)));
    }

    #[test]
    fn fc3_thresholds() {
        let inst = build_csp(&fc3(), 0.5);
        for v in 0..3 {
            assert_eq!(inst.domain_labels(v), vec![0, 1]);
        }
        for e in inst.edges() {
            assert_eq!(e.relation, vec![false, true, true, false]);
        }
        let wide = build_csp(&fc3(), 2.0);
        assert!(wide.edges.iter().all(|e| e.relation.iter().all(|&b| b)));
    }

    #[test]
    fn eps_monotone() {
        let m = crate::oracle::random_model(3);
        let mut prev = build_csp(&m, 0.0);
        for eps in [0.05, 0.1, 0.3, 0.7, 2.0] {
            let next = build_csp(&m, eps);
            assert!(prev.is_subinstance_of(&next));
            prev = next;
        }
    }

    #[test]
    fn ball_restriction() {
        let p = path5();
        let b = restrict_to_ball(&p, 0, 2);
        assert_eq!(b.num_included(), 3);
        assert_eq!(b.edges().len(), 2);
        let all = restrict_to_ball(&p, 0, 10);
        assert_eq!(all.num_included(), 5);
        assert!(all.same_masks(&p));

        let full = vec![true; 4];
        let star = CspInstance::from_masks(
            vec![2; 5],
            vec![vec![true; 2]; 5],
            (1..5).map(|i| (0, i, full.clone())).collect(),
        );
        let s = restrict_to_ball(&star, 0, 1);
        assert_eq!(s.num_included(), 5);
        assert_eq!(s.edges().len(), 4);
    }

    #[test]
    fn fixing_labels() {
        let inst = build_csp(&fc3(), 0.5);
        let fixed = fix_label(&inst, 0, 0).unwrap();
        assert_eq!(fixed.domain_labels(0), vec![0]);
        let again = fix_label(&fixed, 0, 0).unwrap();
        assert!(again.same_masks(&fixed));
        assert_eq!(
            fix_label(&fixed, 0, 1).unwrap_err(),
            CspError::LabelNotInDomain { var: 0, label: 1 }
        );
        // fixed-away labels are not trace records
        assert!(fixed.history().is_empty());
    }

    #[test]
    fn arc_consistent_input_has_empty_trace() {
        let inst = build_csp(&fc3(), 0.5);
        let (closure, trace) = ac3(&inst);
        assert!(trace.new_records().is_empty());
        assert!(!trace.is_wipeout());
        assert!(closure.same_masks(&inst));

        let single = CspInstance::from_masks(
            vec![2, 2],
            vec![vec![true; 2]; 2],
            vec![(0, 1, vec![true; 4])],
        );
        let (_, t) = ac3(&single);
        assert!(t.new_records().is_empty());
    }

    #[test]
    fn fc3_probe_trace() {
        let inst = fix_label(&build_csp(&fc3(), 0.5), 0, 0).unwrap();
        let (closure, trace) = ac3(&inst);
        // FIFO from the ascending seed: both neighbors of the root lose
        // label 0, then vertex 2 empties and the trace is closed at the root
        assert_eq!(
            trace.steps(),
            vec![(1, 0, Some(0)), (2, 0, Some(0)), (2, 1, Some(1)), (0, 0, Some(2))]
        );
        assert_eq!(trace.wipeout, Some(2));
        assert_eq!(trace.records.last().unwrap().kind, DeletionKind::Extension);
        assert_eq!(closure.domain_labels(0), Vec::<usize>::new());

        let naive = naive_ac_fixpoint(&inst);
        assert!(naive.has_wipeout().is_some());

        let min = minimal_trace(&trace).unwrap();
        assert_eq!(
            min.steps(),
            vec![(1, 0, Some(0)), (2, 1, Some(1)), (0, 0, Some(2))]
        );
        assert!(replay_derives_wipeout(&inst, &min));
        let again = minimal_trace(&min).unwrap();
        assert_eq!(again, min);
    }

    #[test]
    fn minimal_trace_drops_pendant_branch() {
        // triangle 0-1-2 with the FC3 relation plus a pendant vertex 3 off
        // vertex 0 whose relation only allows (0, 0)
        let ne = vec![false, true, true, false];
        let pendant = vec![true, false, false, false];
        let inst = CspInstance::from_masks(
            vec![2; 4],
            vec![vec![true; 2]; 4],
            vec![(0, 1, ne.clone()), (0, 2, ne.clone()), (1, 2, ne), (0, 3, pendant)],
        );
        let fixed = fix_label(&inst, 0, 0).unwrap();
        let (_, trace) = ac3(&fixed);
        assert!(trace.steps().contains(&(3, 1, Some(0))));
        let min = minimal_trace(&trace).unwrap();
        assert!(!min.steps().iter().any(|&(v, _, _)| v == 3));
        assert!(replay_derives_wipeout(&fixed, &min));
        // every retained record is necessary
        for skip in 0..min.records.len() {
            let mut cut = min.clone();
            cut.records.remove(skip);
            assert!(!replay_derives_wipeout(&fixed, &cut), "record {skip} was redundant");
        }
    }

    #[test]
    fn minimal_trace_requires_wipeout() {
        let inst = build_csp(&fc3(), 0.5);
        let (_, trace) = ac3(&inst);
        assert_eq!(minimal_trace(&trace).unwrap_err(), CspError::NoWipeout);
    }

    #[test]
    fn empty_relation_empties_both_ends() {
        let inst = CspInstance::from_masks(
            vec![2, 3],
            vec![vec![true; 2], vec![true; 3]],
            vec![(0, 1, vec![false; 6])],
        );
        let (full, _) = ac3_with(&inst, AcOptions { stop_on_wipeout: false });
        assert!(full.domain_labels(0).is_empty());
        assert!(full.domain_labels(1).is_empty());
        assert!(full.same_masks(&naive_ac_fixpoint(&inst)));
    }

    #[test]
    fn closure_independent_of_seed_order() {
        for seed in 0..200 {
            let inst = crate::oracle::random_csp(seed);
            let (a, _) = ac3_with(&inst, AcOptions { stop_on_wipeout: false });
            // reversed seeding: relabel variables in reverse order
            let n = inst.num_vars();
            let rev = |v: usize| n - 1 - v;
            let edges = inst
                .edges()
                .iter()
                .map(|e| (rev(e.u), rev(e.v), e.active.clone()))
                .collect();
            let doms = (0..n).map(|v| inst.domain(rev(v)).to_vec()).collect();
            let sizes = (0..n).map(|v| inst.domain_sizes()[rev(v)]).collect();
            let mirrored = CspInstance::from_masks(sizes, doms, edges);
            let (b, _) = ac3_with(&mirrored, AcOptions { stop_on_wipeout: false });
            for v in 0..n {
                assert_eq!(a.domain(v), b.domain(rev(v)), "seed {seed}");
            }
        }
    }
}
