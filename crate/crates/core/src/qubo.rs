//! Penalized QUBO for single-pair routing.
//!
//! The energy of an edge selection `x` is
//!
//! ```text
//! H(x) = sum_e c_e x_e
//!      + P1 (out(S) - 1)^2 + P2 (in(D) - 1)^2
//!      + P3 sum_{i not in {S, D}} (out(i) - in(i))^2
//! ```
//!
//! Quadratic coefficients are stored folded: one upper-triangle entry
//! `Q[k][l]` (k < l) carries the sum of both ordered-pair coefficients, so
//! the quadratic part of the energy is `sum_{k<l} Q[k][l] x_k x_l`.
//!
//! Each squared penalty is also kept in factored form, a scale and a sparse
//! coefficient vector `a` with `Q[k][l] += scale * a_k * a_l`. Consumers that
//! only need matrix-vector products (the CIM integrator) use the factors and
//! stay linear in the edge count.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::NetworkInstance;

/// Bijection between routing edges and QUBO variables, ordered by
/// `(from, to)`. Edges entering the source or leaving the destination are
/// not routing edges and have no variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableMap {
    edge_of_var: Vec<usize>,
    var_of_edge: Vec<Option<usize>>,
}

impl VariableMap {
    pub fn routing(instance: &NetworkInstance) -> Self {
        let mut edge_of_var = Vec::new();
        let mut var_of_edge = vec![None; instance.edge_count()];
        for (k, slot) in var_of_edge.iter_mut().enumerate() {
            if instance.is_routing_edge(k) {
                *slot = Some(edge_of_var.len());
                edge_of_var.push(k);
            }
        }
        Self {
            edge_of_var,
            var_of_edge,
        }
    }

    pub fn len(&self) -> usize {
        self.edge_of_var.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_of_var.is_empty()
    }

    /// Instance edge index of variable `var`.
    pub fn edge(&self, var: usize) -> usize {
        self.edge_of_var[var]
    }

    pub fn var(&self, edge: usize) -> Option<usize> {
        self.var_of_edge.get(edge).copied().flatten()
    }

    pub fn edges(&self) -> &[usize] {
        &self.edge_of_var
    }

    /// Binary assignment selecting exactly `edges`.
    pub fn indicator(&self, edges: &[usize]) -> Result<Vec<bool>> {
        let mut x = vec![false; self.len()];
        for &e in edges {
            let v = self
                .var(e)
                .ok_or_else(|| Error::InvalidNetwork(format!("edge {e} is not a routing edge")))?;
            x[v] = true;
        }
        Ok(x)
    }
}

/// A rank-one contribution to the folded quadratic: `Q[k][l] += scale * a_k * a_l`
/// for every pair `k < l` of entries in `terms`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFactor {
    pub scale: f64,
    /// `(variable, coefficient)` with distinct, ascending variables.
    pub terms: Vec<(usize, f64)>,
}

impl QuadraticFactor {
    pub fn dot(&self, v: &[f64]) -> f64 {
        self.terms.iter().map(|&(k, a)| a * v[k]).sum()
    }

    fn for_each_pair(&self, mut f: impl FnMut(usize, usize, f64)) {
        for (i, &(k, ak)) in self.terms.iter().enumerate() {
            for &(l, al) in &self.terms[i + 1..] {
                f(k, l, self.scale * ak * al);
            }
        }
    }
}

/// Upper-triangle sparse entries `(k, l, value)` with `k < l`, sorted.
pub type SparsePairs = Vec<(usize, usize, f64)>;

fn materialize(residual: &SparsePairs, factors: &[QuadraticFactor]) -> SparsePairs {
    let mut all = residual.clone();
    for f in factors {
        f.for_each_pair(|k, l, v| all.push((k, l, v)));
    }
    all.sort_by_key(|p| (p.0, p.1));
    let mut merged: SparsePairs = Vec::with_capacity(all.len());
    for (k, l, v) in all {
        match merged.last_mut() {
            Some(last) if last.0 == k && last.1 == l => last.2 += v,
            _ => merged.push((k, l, v)),
        }
    }
    merged.retain(|e| e.2 != 0.0);
    merged
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    dimension: usize,
    quadratic: SparsePairs,
    linear: Vec<f64>,
    offset: f64,
    factors: Vec<QuadraticFactor>,
    residual: SparsePairs,
}

impl QuboModel {
    pub fn zero(dimension: usize) -> Self {
        QuboBuilder::new(dimension).build()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// All folded quadratic coefficients, `k < l`, sorted, no zeros.
    pub fn quadratic(&self) -> &[(usize, usize, f64)] {
        &self.quadratic
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Factored part of the quadratic.
    pub fn factors(&self) -> &[QuadraticFactor] {
        &self.factors
    }

    /// Quadratic entries not covered by `factors`.
    pub fn residual(&self) -> &[(usize, usize, f64)] {
        &self.residual
    }

    /// `sum_{k<l} Q_kl x_k x_l + sum_k q_k x_k + offset`.
    pub fn energy(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        let mut e = self.offset;
        for (k, &q) in self.linear.iter().enumerate() {
            if x[k] {
                e += q;
            }
        }
        for &(k, l, v) in &self.quadratic {
            if x[k] && x[l] {
                e += v;
            }
        }
        Ok(e)
    }
}

/// Accumulates a [`QuboModel`].
#[derive(Debug, Clone)]
pub struct QuboBuilder {
    dimension: usize,
    linear: Vec<f64>,
    offset: f64,
    pairs: BTreeMap<(usize, usize), f64>,
    factors: Vec<QuadraticFactor>,
}

impl QuboBuilder {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            linear: vec![0.0; dimension],
            offset: 0.0,
            pairs: BTreeMap::new(),
            factors: Vec::new(),
        }
    }

    pub fn add_linear(&mut self, k: usize, v: f64) -> &mut Self {
        self.linear[k] += v;
        self
    }

    /// Adds `v * x_k * x_l`. A diagonal entry folds into the linear term.
    pub fn add_pair(&mut self, k: usize, l: usize, v: f64) -> &mut Self {
        if k == l {
            self.linear[k] += v;
        } else {
            *self.pairs.entry((k.min(l), k.max(l))).or_insert(0.0) += v;
        }
        self
    }

    pub fn add_offset(&mut self, v: f64) -> &mut Self {
        self.offset += v;
        self
    }

    /// Adds `weight * (sum_k a_k x_k - target)^2`. Repeated variables in
    /// `terms` are merged first.
    pub fn add_squared_penalty(
        &mut self,
        weight: f64,
        terms: &[(usize, f64)],
        target: f64,
    ) -> &mut Self {
        let mut merged: Vec<(usize, f64)> = terms.to_vec();
        merged.sort_by_key(|t| t.0);
        merged.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        merged.retain(|t| t.1 != 0.0);
        // x_k^2 = x_k puts the squared diagonal on the linear term.
        for &(k, a) in &merged {
            self.linear[k] += weight * (a * a - 2.0 * target * a);
        }
        self.offset += weight * target * target;
        if weight != 0.0 && merged.len() >= 2 {
            self.factors.push(QuadraticFactor {
                scale: 2.0 * weight,
                terms: merged,
            });
        }
        self
    }

    pub fn build(self) -> QuboModel {
        let residual: SparsePairs = self
            .pairs
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .map(|((k, l), v)| (k, l, v))
            .collect();
        QuboModel {
            dimension: self.dimension,
            quadratic: materialize(&residual, &self.factors),
            linear: self.linear,
            offset: self.offset,
            factors: self.factors,
            residual,
        }
    }
}

/// Constraint penalty coefficients for the source, destination and flow
/// balance terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl PenaltyConfig {
    pub const MIN_DEFAULT: f64 = 1.0;

    pub fn new(p1: f64, p2: f64, p3: f64) -> Result<Self> {
        if [p1, p2, p3].iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidConfig(
                "penalties must be finite and non-negative".into(),
            ));
        }
        Ok(Self { p1, p2, p3 })
    }
}

/// `P1 = P2 = 2 * sum(costs)` (at least 1) and `P3 = 2 * P1`. Any unit
/// constraint violation then costs more than selecting every edge.
pub fn default_penalties(costs: &[f64]) -> PenaltyConfig {
    let total: f64 = costs.iter().sum();
    let p = (2.0 * total).max(PenaltyConfig::MIN_DEFAULT);
    PenaltyConfig {
        p1: p,
        p2: p,
        p3: 2.0 * p,
    }
}

/// Smaller penalties sized to the cost of the longest possible simple path:
/// `P1 = P2 = factor * (n - 1) * max(costs)` (at least `factor`) and
/// `P3 = 2 * P1`. Penalized minima are no longer guaranteed feasible, but
/// the energy landscape is far better conditioned for the amplitude
/// dynamics.
pub fn path_scaled_penalties(costs: &[f64], node_count: usize, factor: f64) -> PenaltyConfig {
    let max = costs.iter().cloned().fold(0.0, f64::max);
    let bound = node_count.saturating_sub(1) as f64 * max;
    let p = factor * bound.max(PenaltyConfig::MIN_DEFAULT);
    PenaltyConfig {
        p1: p,
        p2: p,
        p3: 2.0 * p,
    }
}

/// How penalty coefficients are chosen for an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyScheme {
    /// [`default_penalties`].
    Auto,
    /// [`path_scaled_penalties`] with the given factor.
    PathScaled(f64),
    Fixed(PenaltyConfig),
}

impl PenaltyScheme {
    pub const DEFAULT_PATH_FACTOR: f64 = 0.25;

    pub fn resolve(&self, costs: &[f64], node_count: usize) -> PenaltyConfig {
        match *self {
            PenaltyScheme::Auto => default_penalties(costs),
            PenaltyScheme::PathScaled(f) => path_scaled_penalties(costs, node_count, f),
            PenaltyScheme::Fixed(p) => p,
        }
    }
}

/// A routing QUBO together with its variable map.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingQubo {
    pub map: VariableMap,
    pub model: QuboModel,
}

/// Builds the penalized routing QUBO. `costs` is indexed by instance edge.
pub fn build_qubo(
    instance: &NetworkInstance,
    costs: &[f64],
    penalties: &PenaltyConfig,
) -> Result<RoutingQubo> {
    if costs.len() != instance.edge_count() {
        return Err(Error::DimensionMismatch {
            expected: instance.edge_count(),
            found: costs.len(),
        });
    }
    let map = VariableMap::routing(instance);
    let mut b = QuboBuilder::new(map.len());
    for (var, &edge) in map.edges().iter().enumerate() {
        b.add_linear(var, costs[edge]);
    }

    let vars = |edges: &[usize], sign: f64| -> Vec<(usize, f64)> {
        edges
            .iter()
            .filter_map(|&e| map.var(e).map(|v| (v, sign)))
            .collect()
    };
    let s = instance.source();
    let d = instance.destination();
    b.add_squared_penalty(penalties.p1, &vars(instance.out_edges(s), 1.0), 1.0);
    b.add_squared_penalty(penalties.p2, &vars(instance.in_edges(d), 1.0), 1.0);
    for i in 0..instance.node_count() {
        if i == s || i == d {
            continue;
        }
        let mut terms = vars(instance.out_edges(i), 1.0);
        terms.extend(vars(instance.in_edges(i), -1.0));
        b.add_squared_penalty(penalties.p3, &terms, 0.0);
    }
    Ok(RoutingQubo {
        map,
        model: b.build(),
    })
}
