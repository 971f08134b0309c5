//! Factor-graph data model: the live relaxation that every algorithm mutates.
//!
//! A [`Relaxation`] holds singleton, pair and triplet factors with dense
//! cost tables, and the Hasse diagram between them. Scopes are stored in
//! ascending variable order and tables are row-major over that order, so a
//! pair entry `(a, b)` on `{u, v}` with `u < v` lives at `a * |X_v| + b`.

use std::collections::HashMap;

use crate::error::ModelError;

/// Stable, append-only index into [`Relaxation::factors`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub scope: Vec<usize>,
    pub costs: Vec<f64>,
}

impl Factor {
    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn min_cost(&self) -> f64 {
        self.costs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// One label per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling(pub Vec<usize>);

impl From<Vec<usize>> for Labeling {
    fn from(labels: Vec<usize>) -> Self {
        Labeling(labels)
    }
}

impl AsRef<[usize]> for Labeling {
    fn as_ref(&self) -> &[usize] {
        &self.0
    }
}

/// A pairwise cost term handed to [`Relaxation::build`]. The table is
/// row-major over `(u, v)` in the order given here.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTerm {
    pub u: usize,
    pub v: usize,
    pub costs: Vec<f64>,
}

impl PairTerm {
    pub fn new(u: usize, v: usize, costs: Vec<f64>) -> Self {
        PairTerm { u, v, costs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    domain_sizes: Vec<usize>,
    factors: Vec<Factor>,
    hasse_edges: Vec<(FactorId, FactorId)>,
    factor_index: HashMap<Vec<usize>, FactorId>,
}

impl Relaxation {
    /// Builds the pairwise model `F = V ∪ E`. Singleton factor ids equal
    /// variable ids.
    pub fn build(
        domain_sizes: Vec<usize>,
        unary_costs: Vec<Vec<f64>>,
        pairwise: Vec<PairTerm>,
    ) -> Result<Self, ModelError> {
        if unary_costs.len() != domain_sizes.len() {
            return Err(ModelError::UnaryCount {
                expected: domain_sizes.len(),
                got: unary_costs.len(),
            });
        }
        let mut model = Relaxation {
            domain_sizes,
            factors: Vec::new(),
            hasse_edges: Vec::new(),
            factor_index: HashMap::new(),
        };
        for (v, costs) in unary_costs.into_iter().enumerate() {
            let size = model.domain_sizes[v];
            if size == 0 {
                return Err(ModelError::EmptyDomain { var: v });
            }
            if costs.len() != size {
                return Err(ModelError::DimensionMismatch {
                    scope: vec![v],
                    expected: size,
                    got: costs.len(),
                });
            }
            model.push_factor(vec![v], costs);
        }
        for term in pairwise {
            model.insert_pair(term.u, term.v, term.costs)?;
        }
        Ok(model)
    }

    /// Adds a pairwise factor after construction. Fails if the pair exists.
    pub fn insert_pair(
        &mut self,
        u: usize,
        v: usize,
        costs: Vec<f64>,
    ) -> Result<FactorId, ModelError> {
        self.check_var(u)?;
        self.check_var(v)?;
        if u == v {
            return Err(ModelError::SelfLoop { var: u });
        }
        let (du, dv) = (self.domain_sizes[u], self.domain_sizes[v]);
        if costs.len() != du * dv {
            return Err(ModelError::DimensionMismatch {
                scope: vec![u, v],
                expected: du * dv,
                got: costs.len(),
            });
        }
        let (lo, hi) = (u.min(v), u.max(v));
        if self.factor_index.contains_key(&vec![lo, hi]) {
            return Err(ModelError::DuplicateEdge { u: lo, v: hi });
        }
        let costs = if u < v {
            costs
        } else {
            // transpose (v, u) table into (u, v) order
            let mut t = vec![0.0; costs.len()];
            for b in 0..du {
                for a in 0..dv {
                    t[a * du + b] = costs[b * dv + a];
                }
            }
            t
        };
        Ok(self.push_factor(vec![lo, hi], costs))
    }

    /// Adds the zero-cost triplet `{u, v, w}` together with any missing
    /// pair subsets. Idempotent: an existing triplet id is returned as is.
    pub fn add_triplet(&mut self, vars: [usize; 3]) -> Result<FactorId, ModelError> {
        for &x in &vars {
            self.check_var(x)?;
        }
        let mut scope = vars.to_vec();
        scope.sort_unstable();
        if scope[0] == scope[1] || scope[1] == scope[2] {
            return Err(ModelError::NonDistinct {
                vars: vars.to_vec(),
            });
        }
        if let Some(&id) = self.factor_index.get(&scope) {
            return Ok(id);
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            self.ensure_pair(scope[i], scope[j]);
        }
        let size = scope.iter().map(|&x| self.domain_sizes[x]).product();
        Ok(self.push_factor(scope, vec![0.0; size]))
    }

    /// Returns the pair factor `{u, v}`, adding a zero-cost one if absent.
    pub fn ensure_pair(&mut self, u: usize, v: usize) -> FactorId {
        let key = vec![u.min(v), u.max(v)];
        if let Some(&id) = self.factor_index.get(&key) {
            return id;
        }
        let size = self.domain_sizes[u] * self.domain_sizes[v];
        self.push_factor(key, vec![0.0; size])
    }

    fn push_factor(&mut self, scope: Vec<usize>, costs: Vec<f64>) -> FactorId {
        let id = FactorId(self.factors.len());
        // children of a new factor already exist, so pushing them sorted by
        // child id keeps the edge list sorted by (parent, child)
        let mut children: Vec<FactorId> = Vec::new();
        if scope.len() > 1 {
            for skip in 0..scope.len() {
                let sub: Vec<usize> = scope
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &x)| x)
                    .collect();
                if let Some(&child) = self.factor_index.get(&sub) {
                    children.push(child);
                }
            }
        }
        children.sort_unstable();
        for child in children {
            self.hasse_edges.push((id, child));
        }
        self.factor_index.insert(scope.clone(), id);
        self.factors.push(Factor { scope, costs });
        id
    }

    fn check_var(&self, v: usize) -> Result<(), ModelError> {
        if v >= self.num_vars() {
            Err(ModelError::UnknownVariable {
                var: v,
                num_vars: self.num_vars(),
            })
        } else {
            Ok(())
        }
    }

    pub fn num_vars(&self) -> usize {
        self.domain_sizes.len()
    }

    pub fn domain_sizes(&self) -> &[usize] {
        &self.domain_sizes
    }

    pub fn domain_size(&self, v: usize) -> usize {
        self.domain_sizes[v]
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, id: FactorId) -> &Factor {
        &self.factors[id.0]
    }

    pub fn costs_mut(&mut self, id: FactorId) -> &mut [f64] {
        &mut self.factors[id.0].costs
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Hasse diagram edges `(parent, child)`, sorted by `(parent, child)`.
    pub fn hasse_edges(&self) -> &[(FactorId, FactorId)] {
        &self.hasse_edges
    }

    /// Looks up a factor by scope; the scope need not be sorted.
    pub fn find_factor(&self, scope: &[usize]) -> Option<FactorId> {
        let mut key = scope.to_vec();
        key.sort_unstable();
        self.factor_index.get(&key).copied()
    }

    pub fn singleton(&self, v: usize) -> FactorId {
        FactorId(v)
    }

    pub fn pair(&self, u: usize, v: usize) -> Option<FactorId> {
        self.factor_index.get(&vec![u.min(v), u.max(v)]).copied()
    }

    /// Pair factor ids in ascending `(u, v)` order.
    pub fn pairs(&self) -> Vec<FactorId> {
        let mut ids: Vec<FactorId> = (0..self.factors.len())
            .map(FactorId)
            .filter(|&id| self.factor(id).arity() == 2)
            .collect();
        ids.sort_by_key(|&id| (self.factor(id).scope[0], self.factor(id).scope[1]));
        ids
    }

    pub fn triplets(&self) -> impl Iterator<Item = FactorId> + '_ {
        (0..self.factors.len())
            .map(FactorId)
            .filter(|&id| self.factor(id).arity() == 3)
    }

    pub fn num_triplets(&self) -> usize {
        self.triplets().count()
    }

    pub fn has_triplet(&self, vars: [usize; 3]) -> bool {
        self.find_factor(&vars).is_some()
    }

    /// Pair cost `θ_uv(a, b)` with `a` the label of `u`, in either order.
    pub fn pair_cost(&self, u: usize, v: usize, a: usize, b: usize) -> Option<f64> {
        let id = self.pair(u, v)?;
        let f = self.factor(id);
        let idx = if u < v {
            a * self.domain_sizes[v] + b
        } else {
            b * self.domain_sizes[u] + a
        };
        Some(f.costs[idx])
    }

    /// Table index of the entry selected by `labels`, given as
    /// `(variable, label)` pairs covering the factor scope.
    pub fn entry_index(&self, id: FactorId, labels: &[(usize, usize)]) -> usize {
        let f = self.factor(id);
        let mut idx = 0;
        for &x in &f.scope {
            let label = labels
                .iter()
                .find(|(var, _)| *var == x)
                .map(|&(_, l)| l)
                .expect("assignment must cover the factor scope");
            idx = idx * self.domain_sizes[x] + label;
        }
        idx
    }

    pub fn factor_dims(&self, id: FactorId) -> Vec<usize> {
        self.factor(id)
            .scope
            .iter()
            .map(|&x| self.domain_sizes[x])
            .collect()
    }

    /// For a Hasse edge `(parent, child)`, maps every parent entry to the
    /// child entry it restricts to.
    pub fn restriction_map(&self, parent: FactorId, child: FactorId) -> Vec<usize> {
        let ps = &self.factor(parent).scope;
        let cs = &self.factor(child).scope;
        let dims = self.factor_dims(parent);
        let keep: Vec<bool> = ps.iter().map(|x| cs.contains(x)).collect();
        let size: usize = dims.iter().product();
        let mut out = Vec::with_capacity(size);
        let mut digits = vec![0usize; dims.len()];
        for _ in 0..size {
            let mut c = 0;
            for (k, &d) in digits.iter().enumerate() {
                if keep[k] {
                    c = c * dims[k] + d;
                }
            }
            out.push(c);
            // increment row-major counter
            for k in (0..dims.len()).rev() {
                digits[k] += 1;
                if digits[k] < dims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        out
    }

    fn check_labeling(&self, x: &[usize]) -> Result<(), ModelError> {
        if x.len() != self.num_vars() {
            return Err(ModelError::LabelingLength {
                expected: self.num_vars(),
                got: x.len(),
            });
        }
        for (v, &a) in x.iter().enumerate() {
            if a >= self.domain_sizes[v] {
                return Err(ModelError::InvalidLabel {
                    var: v,
                    label: a,
                    size: self.domain_sizes[v],
                });
            }
        }
        Ok(())
    }

    /// Energy `f[θ](x) = Σ_α θ_α(x_α)`.
    pub fn evaluate(&self, x: impl AsRef<[usize]>) -> Result<f64, ModelError> {
        let x = x.as_ref();
        self.check_labeling(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &[usize]) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                let idx = f
                    .scope
                    .iter()
                    .fold(0, |acc, &v| acc * self.domain_sizes[v] + x[v]);
                f.costs[idx]
            })
            .sum()
    }

    /// Lower bound `Φ(θ) = Σ_α min θ_α`.
    pub fn lower_bound(&self) -> f64 {
        self.factors.iter().map(Factor::min_cost).sum()
    }

    /// Product of domain sizes, as a float to avoid overflow.
    pub fn num_labelings(&self) -> f64 {
        self.domain_sizes.iter().map(|&d| d as f64).product()
    }

    /// Checks the structural invariants: scopes sorted and distinct, arity
    /// at most three, triplets closed under subsets, and `J` equal to the
    /// Hasse diagram of the factor poset.
    pub fn check_invariants(&self) -> bool {
        let mut expected = Vec::new();
        for (i, f) in self.factors.iter().enumerate() {
            if f.scope.is_empty() || f.scope.len() > 3 {
                return false;
            }
            if f.scope.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            if self.factor_index.get(&f.scope) != Some(&FactorId(i)) {
                return false;
            }
            let size: usize = f.scope.iter().map(|&x| self.domain_sizes[x]).product();
            if f.costs.len() != size {
                return false;
            }
            if f.scope.len() > 1 {
                for skip in 0..f.scope.len() {
                    let sub: Vec<usize> = f
                        .scope
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != skip)
                        .map(|(_, &x)| x)
                        .collect();
                    match self.factor_index.get(&sub) {
                        Some(&c) => expected.push((FactorId(i), c)),
                        None if f.scope.len() == 3 => return false,
                        None => {}
                    }
                }
            }
        }
        if self.factor_index.len() != self.factors.len() {
            return false;
        }
        expected.sort_unstable();
        expected == self.hasse_edges
    }
}
