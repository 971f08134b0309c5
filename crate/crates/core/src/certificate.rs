//! Certificates: explicit reparameterizations that raise `θ_r(s)` after the
//! probe `(r, s)` wiped out, built from its deletion trace.
//!
//! The trace becomes a DAG whose nodes are deleted labels and whose edges
//! run from every label deleted at `u_j` to the later label `a_j` that was
//! deleted through `u_j`. Nodes are contracted into per-vertex groups, each
//! group `C` carries the flow `f_C = B(C) · ε / max B`, and the flow is
//! routed through the triplets `{r, u, v}` so that no factor minimum drops
//! while `θ_r(s)` rises by `f_S = ε / max B`.
//!
//! Two details differ from a literal per-edge reading. A pair `(a, c)` on
//! `{u, v}` is charged to its inactive slack only when `a` was not deleted
//! before `c`; earlier deletions are always routed through the DAG, so no
//! slack is spent twice. Labels removed by the unary threshold are sources
//! whose flow is taken from the unary table.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::{Deletion, DeletionKind, DeletionTrace};
use crate::error::{CertificateError, ReparamError};
use crate::model::{FactorId, Relaxation};
use crate::oracle::for_each_labeling;
use crate::reparam::{apply_messages, edge_position, MessageVector};

/// Tolerance for minima and gain checks.
pub const CHECK_TOL: f64 = 1e-9;
/// Exhaustive energy check up to this many labelings, sampling above.
pub const EXHAUSTIVE_LIMIT: f64 = 1e5;
pub const ENERGY_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct DagNode {
    pub var: usize,
    pub label: usize,
    pub via: Option<usize>,
    pub kind: DeletionKind,
    /// Index of the record in the trace.
    pub record: usize,
}

/// The deletion DAG `𝒢`. Node order is deletion order, so it is also a
/// topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateDag {
    pub r: usize,
    pub s: usize,
    pub nodes: Vec<DagNode>,
    /// `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl CertificateDag {
    pub fn sink(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn in_edges(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.1 == j).map(|e| e.0)
    }

    /// `u_K`, the neighbor through which `s` was deleted.
    pub fn last_via(&self) -> usize {
        self.nodes[self.sink()].via.expect("checked in build_dag")
    }
}

/// Builds `𝒢` from a minimal trace that ends with the deletion of `s` at
/// `r`. Records at `r` other than the last one carry no information for the
/// certificate and are dropped, together with records that no longer lead
/// to the last one.
pub fn build_dag(trace: &DeletionTrace) -> Result<CertificateDag, CertificateError> {
    let (r, s) = trace
        .root
        .ok_or_else(|| CertificateError::MalformedTrace("trace has no root".into()))?;
    let last = trace
        .records
        .last()
        .ok_or_else(|| CertificateError::MalformedTrace("empty trace".into()))?;
    if last.var != r || last.label != s {
        return Err(CertificateError::MalformedTrace(format!(
            "last record deletes label {} at {}, expected {s} at {r}",
            last.label, last.var
        )));
    }
    if last.via.is_none() {
        return Err(CertificateError::MalformedTrace(
            "root label deleted without a neighbor".into(),
        ));
    }
    if trace.records.windows(2).any(|w| w[0].index >= w[1].index) {
        return Err(CertificateError::MalformedTrace(
            "record indices are not increasing".into(),
        ));
    }
    let k = trace.records.len();
    let nodes: Vec<DagNode> = trace
        .records
        .iter()
        .enumerate()
        .filter(|&(i, d)| d.var != r || i + 1 == k)
        .map(|(i, d)| node_of(d, i))
        .collect();
    let mut edges = Vec::new();
    for j in 0..nodes.len() {
        let Some(u) = nodes[j].via else { continue };
        for (i, node) in nodes.iter().enumerate().take(j) {
            if node.var == u {
                edges.push((i, j));
            }
        }
    }
    // keep only what feeds the sink; deletions that only explain earlier
    // root deletions would otherwise be extra sinks
    let mut keep = vec![false; nodes.len()];
    keep[nodes.len() - 1] = true;
    for &(i, j) in edges.iter().rev() {
        keep[i] |= keep[j];
    }
    let mut new_id = vec![usize::MAX; nodes.len()];
    let mut kept = Vec::new();
    for (i, node) in nodes.into_iter().enumerate() {
        if keep[i] {
            new_id[i] = kept.len();
            kept.push(node);
        }
    }
    let mut edges: Vec<(usize, usize)> = edges
        .into_iter()
        .filter(|&(i, j)| keep[i] && keep[j])
        .map(|(i, j)| (new_id[i], new_id[j]))
        .collect();
    edges.sort_unstable();
    Ok(CertificateDag { r, s, nodes: kept, edges })
}

fn node_of(d: &Deletion, record: usize) -> DagNode {
    DagNode {
        var: d.var,
        label: d.label,
        via: d.via,
        kind: d.kind,
        record,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub owner: usize,
    /// DAG node indices, ascending.
    pub members: Vec<usize>,
}

/// The contracted graph `𝒢′`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedDag {
    pub groups: Vec<Group>,
    /// Group edges, sorted and deduplicated.
    pub edges: Vec<(usize, usize)>,
    pub sink: usize,
}

impl ContractedDag {
    pub fn in_groups(&self, g: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.1 == g).map(|e| e.0)
    }

    pub fn is_path(&self) -> bool {
        let n = self.groups.len();
        let mut outd = vec![0; n];
        let mut ind = vec![0; n];
        for &(a, b) in &self.edges {
            outd[a] += 1;
            ind[b] += 1;
        }
        outd.iter().all(|&d| d <= 1) && ind.iter().all(|&d| d <= 1)
    }
}

fn group_edges(dag: &CertificateDag, group_of: &[usize]) -> BTreeSet<(usize, usize)> {
    dag.edges
        .iter()
        .map(|&(i, j)| (group_of[i], group_of[j]))
        .collect()
}

fn reaches(edges: &BTreeSet<(usize, usize)>, from: usize, to: usize, n: usize) -> bool {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(x) = queue.pop_front() {
        if x == to {
            return true;
        }
        for &(_, y) in edges.range((x, 0)..(x + 1, 0)) {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    false
}

/// Greedy contraction: candidate pairs are scanned by ascending
/// `(owner, earliest member)` and merged when they share an owner, their
/// in-edges come from a single owner, and no cycle appears. The sink is
/// never merged. Repeats until no pair qualifies.
pub fn contract(dag: &CertificateDag) -> ContractedDag {
    let n = dag.nodes.len();
    let sink_node = dag.sink();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    loop {
        let mut group_of = vec![0; n];
        for (g, m) in members.iter().enumerate() {
            for &i in m {
                group_of[i] = g;
            }
        }
        let edges = group_edges(dag, &group_of);
        let sink = group_of[sink_node];
        let owner = |g: usize| dag.nodes[members[g][0]].var;
        let in_owners = |g: usize| -> BTreeSet<usize> {
            edges
                .iter()
                .filter(|e| e.1 == g)
                .map(|e| owner(e.0))
                .collect()
        };
        let mut order: Vec<usize> = (0..members.len()).filter(|&g| g != sink).collect();
        order.sort_by_key(|&g| (owner(g), members[g][0]));
        let mut merge = None;
        'scan: for (x, &a) in order.iter().enumerate() {
            for &b in &order[x + 1..] {
                if owner(a) != owner(b) {
                    continue;
                }
                let mut ins = in_owners(a);
                ins.extend(in_owners(b));
                if ins.len() > 1 {
                    continue;
                }
                let k = members.len();
                if reaches(&edges, a, b, k) || reaches(&edges, b, a, k) {
                    continue;
                }
                merge = Some((a, b));
                break 'scan;
            }
        }
        let Some((a, b)) = merge else {
            let groups = members
                .iter()
                .map(|m| Group {
                    owner: dag.nodes[m[0]].var,
                    members: m.clone(),
                })
                .collect();
            return ContractedDag {
                groups,
                edges: edges.into_iter().collect(),
                sink,
            };
        };
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        members[a].sort_unstable();
        members.remove(b);
        // keep groups ordered by earliest member
        members.sort_by_key(|m| m[0]);
    }
}

/// Branching factors of a DAG on `n` nodes: `B = 1` at the unique sink and
/// the sum over out-neighbors elsewhere. Returns `B` and its maximum.
pub fn branching_factors(
    n: usize,
    edges: &[(usize, usize)],
) -> Result<(Vec<u64>, u64), CertificateError> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(a, b) in edges {
        out[a].push(b);
        indeg[b] += 1;
    }
    let sinks = out.iter().filter(|o| o.is_empty()).count();
    // Kahn order; a leftover node means a cycle
    let mut order = Vec::with_capacity(n);
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for &y in &out[x] {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                queue.push_back(y);
            }
        }
    }
    if order.len() != n {
        return Err(CertificateError::Cyclic);
    }
    if sinks != 1 {
        return Err(CertificateError::Sinks(sinks));
    }
    let mut b = vec![0u64; n];
    for &x in order.iter().rev() {
        b[x] = if out[x].is_empty() {
            1
        } else {
            out[x].iter().fold(0u64, |acc, &y| acc.saturating_add(b[y]))
        };
    }
    let max = b.iter().copied().max().unwrap_or(1);
    Ok((b, max))
}

/// Which appendix construction to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// Group flows `f_C = B(C) ε / max B`; gain `ε / max B`.
    Branching,
    /// Per-record amounts halving along the trace; gain `2^{1-K} ε`.
    Doubling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub r: usize,
    pub s: usize,
    pub eps: f64,
    pub messages: MessageVector,
    /// Guaranteed increase of `θ_r(s)`.
    pub gain: f64,
    pub max_branching: u64,
    pub dag_nodes: usize,
    pub groups: usize,
    /// `𝒢′` is a path, so the gain is the full `ε`.
    pub path_shaped: bool,
}

/// Accumulates message updates by factor scope.
struct Moves<'a> {
    model: &'a Relaxation,
    messages: MessageVector,
}

impl<'a> Moves<'a> {
    fn new(model: &'a Relaxation) -> Self {
        Moves {
            model,
            messages: MessageVector::zeros(model),
        }
    }

    fn factor(&self, scope: &[usize]) -> Result<FactorId, CertificateError> {
        self.model
            .find_factor(scope)
            .ok_or_else(|| CertificateError::MissingFactor {
                scope: sorted(scope),
            })
    }

    /// `λ[parent → child](labels) += amount`: the child entry rises and
    /// every consistent parent entry falls by `amount`.
    fn push(
        &mut self,
        parent: &[usize],
        child: &[usize],
        labels: &[(usize, usize)],
        amount: f64,
    ) -> Result<(), CertificateError> {
        let p = self.factor(parent)?;
        let c = self.factor(child)?;
        let e = edge_position(self.model, p, c).ok_or_else(|| {
            CertificateError::TraceMismatch(format!("{:?} is not a parent of {:?}", parent, child))
        })?;
        let idx = self.model.entry_index(c, labels);
        self.messages.edge_mut(e)[idx] += amount;
        Ok(())
    }
}

fn sorted(scope: &[usize]) -> Vec<usize> {
    let mut v = scope.to_vec();
    v.sort_unstable();
    v
}

/// Activity of `(a at u, c at v)` in the thresholded model.
fn pair_active(model: &Relaxation, u: usize, v: usize, a: usize, c: usize, eps: f64) -> Option<bool> {
    let id = model.pair(u, v)?;
    let min = model.factor(id).min_cost();
    Some(model.pair_cost(u, v, a, c)? <= min + eps)
}

fn unary_active(model: &Relaxation, v: usize, a: usize, eps: f64) -> bool {
    let f = model.factor(model.singleton(v));
    f.costs[a] <= f.min_cost() + eps
}

fn check_node(model: &Relaxation, dag: &CertificateDag, j: usize, eps: f64) -> Result<(), CertificateError> {
    let node = &dag.nodes[j];
    let mismatch = |msg: String| Err(CertificateError::TraceMismatch(msg));
    if node.var >= model.num_vars() || node.label >= model.domain_size(node.var) {
        return mismatch(format!("label {} at {} is not in the model", node.label, node.var));
    }
    match node.via {
        None => {
            if node.kind != DeletionKind::Initial || unary_active(model, node.var, node.label, eps) {
                return mismatch(format!(
                    "label {} at {} has no cause but its unary is active",
                    node.label, node.var
                ));
            }
        }
        Some(u) if u == dag.r && node.var != dag.r => {
            if pair_active(model, dag.r, node.var, dag.s, node.label, eps) != Some(false) {
                return mismatch(format!(
                    "label {} at {} was deleted through the root but is supported by {}",
                    node.label, node.var, dag.s
                ));
            }
        }
        Some(_) => {}
    }
    Ok(())
}

/// Builds the branching-factor certificate for a minimal probe trace.
/// `model` must already contain every triplet `{r, u_i, v_i}`; activity is
/// measured on its current costs at threshold `eps`.
pub fn build_certificate(
    model: &Relaxation,
    trace: &DeletionTrace,
    eps: f64,
) -> Result<Certificate, CertificateError> {
    let dag = build_dag(trace)?;
    let contracted = contract(&dag);
    let (b, max_b) = branching_factors(contracted.groups.len(), &contracted.edges)?;
    let f_s = eps / max_b as f64;
    let flows: Vec<f64> = b.iter().map(|&x| x as f64 * f_s).collect();
    let messages = certificate_from_flows(model, &dag, &contracted, &flows, eps)?;
    Ok(Certificate {
        r: dag.r,
        s: dag.s,
        eps,
        messages,
        gain: f_s,
        max_branching: max_b,
        dag_nodes: dag.nodes.len(),
        groups: contracted.groups.len(),
        path_shaped: contracted.is_path(),
    })
}

/// Routes the given per-group flows through the triplets. The gain is the
/// flow of the sink group. Flows are not validated, so callers can test
/// what happens when the constraints are violated.
pub fn certificate_from_flows(
    model: &Relaxation,
    dag: &CertificateDag,
    contracted: &ContractedDag,
    flows: &[f64],
    eps: f64,
) -> Result<MessageVector, CertificateError> {
    let (r, s) = (dag.r, dag.s);
    let mut moves = Moves::new(model);
    for j in 0..dag.nodes.len() {
        check_node(model, dag, j, eps)?;
    }

    for (g, group) in contracted.groups.iter().enumerate() {
        if g == contracted.sink {
            continue;
        }
        let v = group.owner;
        let f = flows[g];
        let in_groups: Vec<usize> = contracted.in_groups(g).collect();
        let in_owner = in_groups.first().map(|&a| contracted.groups[a].owner);
        let in_labels: BTreeSet<usize> = in_groups
            .iter()
            .flat_map(|&a| contracted.groups[a].members.iter().map(|&i| dag.nodes[i].label))
            .collect();

        for &m in &group.members {
            let node = &dag.nodes[m];
            let c = node.label;
            match node.via {
                None => {
                    moves.push(&[r, v], &[v], &[(v, c)], -f)?;
                }
                Some(w) if w == r => {}
                Some(w) => {
                    let t = [r, w, v];
                    moves.push(&t, &[r, v], &[(r, s), (v, c)], f)?;
                    let covered = |a: usize| in_owner == Some(w) && in_labels.contains(&a);
                    for a in 0..model.domain_size(w) {
                        if covered(a) {
                            continue;
                        }
                        match pair_active(model, w, v, a, c, eps) {
                            Some(false) => moves.push(&t, &[w, v], &[(w, a), (v, c)], -f)?,
                            Some(true) => {
                                return Err(CertificateError::TraceMismatch(format!(
                                    "label {c} at {v} keeps support {a} at {w}"
                                )))
                            }
                            None => {
                                return Err(CertificateError::MissingFactor {
                                    scope: sorted(&[w, v]),
                                })
                            }
                        }
                    }
                }
            }
        }

        for &a_group in &in_groups {
            let u = contracted.groups[a_group].owner;
            let t = [r, u, v];
            for &i in &contracted.groups[a_group].members {
                let a = dag.nodes[i].label;
                moves.push(&t, &[r, u], &[(r, s), (u, a)], -f)?;
            }
        }
    }

    // final step through u_K
    let uk = dag.last_via();
    let f_s = flows[contracted.sink];
    let deleted: BTreeSet<usize> = dag
        .in_edges(dag.sink())
        .map(|i| dag.nodes[i].label)
        .collect();
    for a in 0..model.domain_size(uk) {
        if !deleted.contains(&a) && pair_active(model, r, uk, s, a, eps) != Some(false) {
            return Err(CertificateError::TraceMismatch(format!(
                "root label {s} keeps support {a} at {uk}"
            )));
        }
    }
    moves.push(&[r, uk], &[r], &[(r, s)], f_s)?;
    Ok(moves.messages)
}

/// The halving construction: record `i` (1-based, in trace order) moves
/// `2^{-i} ε`, and the final step moves `2^{1-K} ε` (`ε` when `K = 1`).
pub fn build_certificate_doubling(
    model: &Relaxation,
    trace: &DeletionTrace,
    eps: f64,
) -> Result<Certificate, CertificateError> {
    let dag = build_dag(trace)?;
    let (r, s) = (dag.r, dag.s);
    let mut moves = Moves::new(model);
    let k = dag.nodes.len();
    let mut deleted_before: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); model.num_vars()];
    for j in 0..k - 1 {
        check_node(model, &dag, j, eps)?;
        let node = &dag.nodes[j];
        let (v, c) = (node.var, node.label);
        let amount = eps * 0.5f64.powi(j as i32 + 1);
        match node.via {
            None => moves.push(&[r, v], &[v], &[(v, c)], -amount)?,
            Some(w) if w == r => {}
            Some(w) => {
                let t = [r, w, v];
                for a in 0..model.domain_size(w) {
                    match pair_active(model, w, v, a, c, eps) {
                        Some(false) => moves.push(&t, &[w, v], &[(w, a), (v, c)], -amount)?,
                        Some(true) if deleted_before[w].contains(&a) => {
                            moves.push(&t, &[r, w], &[(r, s), (w, a)], -amount)?
                        }
                        Some(true) => {
                            return Err(CertificateError::TraceMismatch(format!(
                                "label {c} at {v} keeps support {a} at {w}"
                            )))
                        }
                        None => {
                            return Err(CertificateError::MissingFactor {
                                scope: sorted(&[w, v]),
                            })
                        }
                    }
                }
                moves.push(&t, &[r, v], &[(r, s), (v, c)], amount)?;
            }
        }
        deleted_before[v].insert(c);
    }
    let uk = dag.last_via();
    for a in 0..model.domain_size(uk) {
        if !deleted_before[uk].contains(&a) && pair_active(model, r, uk, s, a, eps) != Some(false) {
            return Err(CertificateError::TraceMismatch(format!(
                "root label {s} keeps support {a} at {uk}"
            )));
        }
    }
    let gain = if k == 1 {
        eps
    } else {
        eps * 0.5f64.powi(k as i32 - 1)
    };
    moves.push(&[r, uk], &[r], &[(r, s)], gain)?;
    Ok(Certificate {
        r,
        s,
        eps,
        messages: moves.messages,
        gain,
        max_branching: 0,
        dag_nodes: k,
        groups: 0,
        path_shaped: false,
    })
}

pub fn build_certificate_with(
    model: &Relaxation,
    trace: &DeletionTrace,
    eps: f64,
    construction: Construction,
) -> Result<Certificate, CertificateError> {
    match construction {
        Construction::Branching => build_certificate(model, trace, eps),
        Construction::Doubling => build_certificate_doubling(model, trace, eps),
    }
}

/// Outcome of [`verify_certificate`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Largest drop of a factor minimum (positive means a drop).
    pub worst_min_drop: f64,
    /// `θ̄_r(s) - θ_r(s)`.
    pub achieved_gain: f64,
    pub required_gain: f64,
    /// Largest relative energy error over the checked labelings.
    pub max_energy_error: f64,
    pub labelings_checked: usize,
    pub exhaustive: bool,
}

impl VerifyReport {
    pub fn minima_ok(&self) -> bool {
        self.worst_min_drop <= CHECK_TOL
    }

    pub fn gain_ok(&self) -> bool {
        self.achieved_gain >= self.required_gain - CHECK_TOL
    }

    pub fn energy_ok(&self) -> bool {
        self.max_energy_error <= 1e-8
    }

    pub fn passed(&self) -> bool {
        self.minima_ok() && self.gain_ok() && self.energy_ok()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(
            f,
            "minima:  {} (worst drop {:.3e})",
            mark(self.minima_ok()),
            self.worst_min_drop
        )?;
        writeln!(
            f,
            "gain:    {} (achieved {:.9}, required {:.9})",
            mark(self.gain_ok()),
            self.achieved_gain,
            self.required_gain
        )?;
        write!(
            f,
            "energy:  {} ({} labelings{}, max rel. error {:.3e})",
            mark(self.energy_ok()),
            self.labelings_checked,
            if self.exhaustive { ", exhaustive" } else { ", sampled" },
            self.max_energy_error
        )
    }
}

/// Checks that `λ` keeps every factor minimum, raises `θ_r(s)` by at least
/// `gain`, and preserves the energy of every labeling (all of them when
/// there are at most [`EXHAUSTIVE_LIMIT`], a seeded sample otherwise).
pub fn verify_certificate(
    model: &Relaxation,
    messages: &MessageVector,
    r: usize,
    s: usize,
    gain: f64,
) -> Result<VerifyReport, ReparamError> {
    let after = apply_messages(model, messages)?;
    let worst_min_drop = model
        .factors()
        .iter()
        .zip(after.factors())
        .map(|(a, b)| a.min_cost() - b.min_cost())
        .fold(f64::NEG_INFINITY, f64::max);
    let id = model.singleton(r);
    let achieved_gain = after.factor(id).costs[s] - model.factor(id).costs[s];

    let mut max_err = 0.0f64;
    let mut checked = 0;
    let mut check = |x: &[usize]| {
        let e0 = model.evaluate_unchecked(x);
        let e1 = after.evaluate_unchecked(x);
        max_err = max_err.max((e1 - e0).abs() / (1.0 + e0.abs()));
        checked += 1;
    };
    let exhaustive = model.num_labelings() <= EXHAUSTIVE_LIMIT;
    if exhaustive {
        for_each_labeling(model.domain_sizes(), check);
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut x = vec![0; model.num_vars()];
        for _ in 0..ENERGY_SAMPLES {
            for (v, xv) in x.iter_mut().enumerate() {
                *xv = rng.gen_range(0..model.domain_size(v));
            }
            check(&x);
        }
    }
    Ok(VerifyReport {
        worst_min_drop,
        achieved_gain,
        required_gain: gain,
        max_energy_error: max_err,
        labelings_checked: checked,
        exhaustive,
    })
}

/// Adds every triplet `{r, u_i, v_i}` a trace needs.
pub fn add_trace_triplets(model: &mut Relaxation, trace: &DeletionTrace) -> Result<(), crate::error::ModelError> {
    let Some((r, _)) = trace.root else { return Ok(()) };
    for d in &trace.records {
        match d.via {
            Some(u) if u != r && d.var != r => {
                model.add_triplet([r, u, d.var])?;
            }
            Some(_) => {
                if d.var != r {
                    model.ensure_pair(r, d.var);
                }
            }
            None if d.var != r => {
                model.ensure_pair(r, d.var);
            }
            None => {}
        }
    }
    Ok(())
}
