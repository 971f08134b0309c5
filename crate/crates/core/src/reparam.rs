//! Messages, reparameterizations and the monotone dual ascent.
//!
//! A message `λ_{αβ}` lives on a Hasse edge `(α, β)` and moves cost from the
//! parent table to the child table; every labeling keeps its energy. The
//! default ascent is min-sum diffusion over the Hasse diagram, which never
//! decreases `Φ`.

use crate::error::ReparamError;
use crate::model::{FactorId, Relaxation};

/// One vector per Hasse edge, indexed like [`Relaxation::hasse_edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct MessageVector {
    values: Vec<Vec<f64>>,
}

impl MessageVector {
    pub fn zeros(model: &Relaxation) -> Self {
        let values = model
            .hasse_edges()
            .iter()
            .map(|&(_, child)| vec![0.0; model.factor(child).costs.len()])
            .collect();
        MessageVector { values }
    }

    pub fn from_values(values: Vec<Vec<f64>>) -> Self {
        MessageVector { values }
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn edge(&self, index: usize) -> &[f64] {
        &self.values[index]
    }

    pub fn edge_mut(&mut self, index: usize) -> &mut [f64] {
        &mut self.values[index]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(|&x| x == 0.0)
    }
}

/// Position of `(parent, child)` in the sorted Hasse edge list.
pub fn edge_position(model: &Relaxation, parent: FactorId, child: FactorId) -> Option<usize> {
    model.hasse_edges().binary_search(&(parent, child)).ok()
}

/// Returns `θ^λ`: the model with every table reparameterized by `λ`.
pub fn apply_messages(
    model: &Relaxation,
    messages: &MessageVector,
) -> Result<Relaxation, ReparamError> {
    let edges = model.hasse_edges();
    if messages.values.len() != edges.len() {
        return Err(ReparamError::EdgeCount {
            expected: edges.len(),
            got: messages.values.len(),
        });
    }
    for (e, &(_, child)) in edges.iter().enumerate() {
        let expected = model.factor(child).costs.len();
        if messages.values[e].len() != expected {
            return Err(ReparamError::MessageLength {
                edge: e,
                expected,
                got: messages.values[e].len(),
            });
        }
    }
    let mut out = model.clone();
    for (e, &(parent, child)) in edges.iter().enumerate() {
        let msg = &messages.values[e];
        if msg.iter().all(|&x| x == 0.0) {
            continue;
        }
        for (c, m) in out.costs_mut(child).iter_mut().zip(msg) {
            *c += m;
        }
        let map = model.restriction_map(parent, child);
        let parent_costs = out.costs_mut(parent);
        for (idx, &c) in map.iter().enumerate() {
            parent_costs[idx] -= msg[c];
        }
    }
    Ok(out)
}

/// One block update on the Hasse edge `(parent, child)`: the child and each
/// parent slice are averaged so both end up at `(m + θ_β) / 2`.
fn diffuse_edge(model: &mut Relaxation, parent: FactorId, child: FactorId, map: &[usize]) {
    let child_len = model.factor(child).costs.len();
    let mut slice_min = vec![f64::INFINITY; child_len];
    for (idx, &c) in map.iter().enumerate() {
        let v = model.factor(parent).costs[idx];
        if v < slice_min[c] {
            slice_min[c] = v;
        }
    }
    let delta: Vec<f64> = model
        .factor(child)
        .costs
        .iter()
        .zip(&slice_min)
        .map(|(&t, &m)| 0.5 * (m - t))
        .collect();
    for (t, d) in model.costs_mut(child).iter_mut().zip(&delta) {
        *t += d;
    }
    let parent_costs = model.costs_mut(parent);
    for (idx, &c) in map.iter().enumerate() {
        parent_costs[idx] -= delta[c];
    }
}

/// A monotone block-coordinate ascent on `max_λ Φ(θ^λ)`.
pub trait DualSolver {
    /// One full sweep; returns the bound afterwards.
    fn pass(&mut self, model: &mut Relaxation) -> f64;

    /// Repeats [`DualSolver::pass`] until `max_passes` or until a pass
    /// improves `Φ` by less than `tolerance`.
    fn solve(&mut self, model: &mut Relaxation, max_passes: usize, tolerance: f64) -> DualOutcome {
        let mut trace = Vec::new();
        let mut prev = model.lower_bound();
        for _ in 0..max_passes.max(1) {
            let bound = self.pass(model);
            trace.push(bound);
            let gain = bound - prev;
            prev = bound;
            if gain < tolerance {
                break;
            }
        }
        DualOutcome {
            bound: prev,
            passes: trace.len(),
            trace,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualOutcome {
    pub bound: f64,
    pub passes: usize,
    /// `Φ` after each pass.
    pub trace: Vec<f64>,
}

/// Min-sum diffusion sweeping Hasse edges in `(parent, child)` order.
///
/// Restriction maps are cached per edge and rebuilt when the model grows.
#[derive(Debug, Default, Clone)]
pub struct MinSumDiffusion {
    maps: Vec<Vec<usize>>,
}

impl MinSumDiffusion {
    pub fn new() -> Self {
        Self::default()
    }

    fn sync(&mut self, model: &Relaxation) {
        let edges = model.hasse_edges();
        // edges are append-only, so cached prefixes stay valid
        for &(parent, child) in &edges[self.maps.len().min(edges.len())..] {
            self.maps.push(model.restriction_map(parent, child));
        }
        self.maps.truncate(edges.len());
    }
}

impl DualSolver for MinSumDiffusion {
    fn pass(&mut self, model: &mut Relaxation) -> f64 {
        self.sync(model);
        let edges = model.hasse_edges().to_vec();
        for (e, &(parent, child)) in edges.iter().enumerate() {
            diffuse_edge(model, parent, child, &self.maps[e]);
        }
        model.lower_bound()
    }
}

/// One deterministic diffusion sweep over the model.
pub fn diffusion_pass(model: &mut Relaxation) -> f64 {
    MinSumDiffusion::new().pass(model)
}

/// Runs min-sum diffusion; see [`DualSolver::solve`].
pub fn solve_dual(model: &mut Relaxation, max_passes: usize, tolerance: f64) -> DualOutcome {
    MinSumDiffusion::new().solve(model, max_passes, tolerance)
}
