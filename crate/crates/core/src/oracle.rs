//! Exact classical baselines: simple-path enumeration, scalarized shortest
//! path, Pareto frontiers and exhaustive QUBO minimization.

use alloc::collections::BinaryHeap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::error::{Error, Result};
use crate::network::NetworkInstance;
use crate::qubo::QuboModel;
use crate::route::{RouteSolution, Scoring};

pub const DEFAULT_MAX_PATHS: usize = 1_000_000;
/// Search steps the pruned Pareto search may take per allowed path.
pub const PARETO_STEPS_PER_PATH: usize = 32;
pub const BRUTE_FORCE_CAP: usize = 24;

/// Relative tolerance for value comparisons against oracle optima.
pub const VALUE_TOLERANCE: f64 = 1e-9;

pub fn values_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= VALUE_TOLERANCE * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Which of (loss, ber, hops) take part in dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectiveSet([bool; 3]);

impl ObjectiveSet {
    pub const NAMES: [&'static str; 3] = ["loss", "ber", "hops"];

    pub fn new(loss: bool, ber: bool, hops: bool) -> Result<Self> {
        if !(loss || ber || hops) {
            return Err(Error::InvalidConfig("no active objective".into()));
        }
        Ok(Self([loss, ber, hops]))
    }

    pub fn all() -> Self {
        Self([true; 3])
    }

    /// Objectives with a non-zero weight.
    pub fn from_weights(w: [f64; 3]) -> Result<Self> {
        Self::new(w[0] > 0.0, w[1] > 0.0, w[2] > 0.0)
    }

    /// Parses a comma-separated list such as `loss,ber`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut on = [false; 3];
        for name in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let name = if name == "hop" { "hops" } else { name };
            let i = Self::NAMES.iter().position(|&n| n == name).ok_or_else(|| {
                let mut msg = String::from("unknown objective ");
                msg.push_str(name);
                Error::InvalidConfig(msg)
            })?;
            on[i] = true;
        }
        Self::new(on[0], on[1], on[2])
    }

    pub fn contains(&self, dim: usize) -> bool {
        self.0[dim]
    }

    pub fn dims(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(|&d| self.0[d])
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.dims().map(|d| Self::NAMES[d]).collect()
    }

    /// `a` dominates `b`: no worse anywhere, strictly better somewhere.
    pub fn dominates(&self, a: &[f64; 3], b: &[f64; 3]) -> bool {
        let mut strict = false;
        for d in self.dims() {
            if a[d] > b[d] {
                return false;
            }
            if a[d] < b[d] {
                strict = true;
            }
        }
        strict
    }

    fn weakly_dominates(&self, a: &[f64; 3], b: &[f64; 3]) -> bool {
        self.dims().all(|d| a[d] <= b[d])
    }
}

/// Limits and edge order for [`search_paths`].
struct SearchPlan<'a> {
    max_paths: usize,
    /// Edges considered, counting pruned ones.
    max_steps: Option<usize>,
    /// Out-edges per node in visiting order; instance order when `None`.
    order: Option<&'a [Vec<usize>]>,
}

impl SearchPlan<'_> {
    fn exhaustive(max_paths: usize) -> Self {
        Self {
            max_paths,
            max_steps: None,
            order: None,
        }
    }
}

/// Depth-first search over simple source-to-destination paths using
/// routing edges. `extend` is asked before descending into an edge and may
/// prune; `complete` receives every finished path. Returns the number of
/// completed paths, or an error once that number would exceed the plan's
/// path limit or the step budget runs out.
fn search_paths(
    instance: &NetworkInstance,
    plan: &SearchPlan<'_>,
    mut extend: impl FnMut(&[usize], usize) -> bool,
    mut complete: impl FnMut(&[usize]),
) -> Result<usize> {
    let max_paths = plan.max_paths;
    let mut steps = 0usize;
    let n = instance.node_count();
    let (s, d) = (instance.source(), instance.destination());
    let mut on_path = vec![false; n];
    let mut path: Vec<usize> = Vec::new();
    // Stack of (node, next out-edge position).
    let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
    on_path[s] = true;
    let mut count = 0usize;
    while let Some(top) = stack.last_mut() {
        let (u, pos) = *top;
        let outs = match plan.order {
            Some(order) => &order[u][..],
            None => instance.out_edges(u),
        };
        if pos >= outs.len() || u == d {
            stack.pop();
            on_path[u] = false;
            path.pop();
            continue;
        }
        top.1 += 1;
        let k = outs[pos];
        let v = instance.edges()[k].to;
        if on_path[v] || !instance.is_routing_edge(k) {
            continue;
        }
        steps += 1;
        if let Some(budget) = plan.max_steps {
            if steps > budget {
                return Err(Error::SearchBudgetExceeded { steps: budget });
            }
        }
        if !extend(&path, k) {
            continue;
        }
        path.push(k);
        if v == d {
            count += 1;
            if count > max_paths {
                return Err(Error::TooManyPaths { limit: max_paths });
            }
            complete(&path);
            path.pop();
        } else {
            on_path[v] = true;
            stack.push((v, 0));
        }
    }
    Ok(count)
}

/// Counts simple paths without materializing them.
pub fn count_paths(instance: &NetworkInstance, max_paths: usize) -> Result<usize> {
    search_paths(
        instance,
        &SearchPlan::exhaustive(max_paths),
        |_, _| true,
        |_| {},
    )
}

/// Calls `f` with the edge sequence of every simple path.
pub fn for_each_path(
    instance: &NetworkInstance,
    max_paths: usize,
    f: impl FnMut(&[usize]),
) -> Result<usize> {
    search_paths(instance, &SearchPlan::exhaustive(max_paths), |_, _| true, f)
}

/// All simple source-to-destination paths, in depth-first order.
pub fn enumerate_paths(
    instance: &NetworkInstance,
    scoring: &Scoring,
    max_paths: usize,
) -> Result<Vec<RouteSolution>> {
    let mut seqs: Vec<Vec<usize>> = Vec::new();
    for_each_path(instance, max_paths, |p| seqs.push(p.to_vec()))?;
    seqs.iter().map(|p| scoring.evaluate(instance, p)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Label {
    cost: OrdF64,
    hops: usize,
    edges: Vec<usize>,
    node: usize,
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .cmp(&other.cost)
            .then(self.hops.cmp(&other.hops))
            .then_with(|| self.edges.cmp(&other.edges))
            .then(self.node.cmp(&other.node))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Edge sequence of the cheapest path under non-negative `costs` (indexed
/// by instance edge). Ties go to fewer hops, then to the lexicographically
/// smallest edge-index sequence.
pub fn shortest_path(instance: &NetworkInstance, costs: &[f64]) -> Result<Vec<usize>> {
    if costs.len() != instance.edge_count() {
        return Err(Error::DimensionMismatch {
            expected: instance.edge_count(),
            found: costs.len(),
        });
    }
    if costs.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
        return Err(Error::Domain("edge costs must be finite and non-negative"));
    }
    let n = instance.node_count();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    let start = Label {
        cost: OrdF64(0.0),
        hops: 0,
        edges: Vec::new(),
        node: instance.source(),
    };
    best[instance.source()] = Some(start.clone());
    heap.push(Reverse(start));
    while let Some(Reverse(label)) = heap.pop() {
        let u = label.node;
        if best[u].as_ref() != Some(&label) {
            continue;
        }
        if u == instance.destination() {
            return Ok(label.edges);
        }
        for &k in instance.out_edges(u) {
            if !instance.is_routing_edge(k) {
                continue;
            }
            let v = instance.edges()[k].to;
            let mut edges = label.edges.clone();
            edges.push(k);
            let next = Label {
                cost: OrdF64(label.cost.0 + costs[k]),
                hops: label.hops + 1,
                edges,
                node: v,
            };
            let better = match &best[v] {
                None => true,
                Some(cur) => {
                    next.cost
                        .cmp(&cur.cost)
                        .then(next.hops.cmp(&cur.hops))
                        .then_with(|| next.edges.cmp(&cur.edges))
                        == Ordering::Less
                }
            };
            if better {
                best[v] = Some(next.clone());
                heap.push(Reverse(next));
            }
        }
    }
    Err(Error::DestinationUnreachable)
}

/// Cheapest cost from every node to the destination over routing edges,
/// ignoring the simple-path restriction. Unreachable nodes get infinity.
fn distances_to_destination(instance: &NetworkInstance, costs: &[f64]) -> Vec<f64> {
    let n = instance.node_count();
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, e) in instance.edges().iter().enumerate() {
        if instance.is_routing_edge(k) {
            incoming[e.to].push(k);
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    let d = instance.destination();
    dist[d] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrdF64(0.0), d)));
    while let Some(Reverse((OrdF64(du), u))) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        for &k in &incoming[u] {
            let v = instance.edges()[k].from;
            let dv = du + costs[k];
            if dv < dist[v] {
                dist[v] = dv;
                heap.push(Reverse((OrdF64(dv), v)));
            }
        }
    }
    dist
}

/// Optimal route under the scoring's scalarized costs.
pub fn scalar_optimum(instance: &NetworkInstance, scoring: &Scoring) -> Result<RouteSolution> {
    let path = shortest_path(instance, &scoring.costs.costs)?;
    scoring.evaluate(instance, &path)
}

/// Mutually non-dominated simple paths in the active objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSet {
    pub active: ObjectiveSet,
    /// Sorted by objective values, then edges.
    pub members: Vec<RouteSolution>,
    /// Completed paths examined by the search.
    pub paths_examined: usize,
}

impl ParetoSet {
    /// Whether some member has the same active objective values as
    /// `values`, within [`VALUE_TOLERANCE`].
    pub fn contains_values(&self, values: &[f64; 3]) -> bool {
        self.members.iter().any(|m| {
            let mv = m.objective_values.as_array();
            self.active.dims().all(|d| values_match(mv[d], values[d]))
        })
    }

    pub fn contains_edges(&self, edges: &[usize]) -> bool {
        self.members.iter().any(|m| m.edges == edges)
    }
}

/// Pareto frontier over all simple paths. When every active per-edge value
/// is strictly positive the search prunes a prefix if a frontier member
/// weakly dominates it, or strictly dominates it plus a lower bound on the
/// remaining cost. Either way every completion is strictly dominated, so
/// the result is unchanged.
pub fn pareto_frontier(
    instance: &NetworkInstance,
    scoring: &Scoring,
    active: ObjectiveSet,
    max_paths: usize,
) -> Result<ParetoSet> {
    let objs = &scoring.objectives;
    let edge_values: Vec<[f64; 3]> = (0..objs.len()).map(|k| objs.values(k)).collect();
    let prunable = edge_values
        .iter()
        .all(|v| active.dims().all(|d| v[d] > 0.0));

    let sum = |path: &[usize]| -> [f64; 3] {
        let mut acc = [0.0; 3];
        for &k in path {
            for d in 0..3 {
                acc[d] += edge_values[k][d];
            }
        }
        acc
    };

    // Per-objective remaining-cost bounds, shrunk slightly so that rounding
    // in the sums can never drop a path that ties a member.
    let bound: Vec<[f64; 3]> = if prunable {
        let per_dim: Vec<Vec<f64>> = (0..3)
            .map(|d| {
                let costs: Vec<f64> = edge_values.iter().map(|v| v[d]).collect();
                distances_to_destination(instance, &costs)
            })
            .collect();
        (0..instance.node_count())
            .map(|u| core::array::from_fn(|d| per_dim[d][u] * (1.0 - 1e-9)))
            .collect()
    } else {
        Vec::new()
    };

    let mut archive: Vec<([f64; 3], Vec<usize>)> = Vec::new();
    let archive_cell = core::cell::RefCell::new(&mut archive);
    let destination = instance.destination();

    let extend = |path: &[usize], k: usize| -> bool {
        if !prunable || instance.edges()[k].to == destination {
            return true;
        }
        let mut partial = sum(path);
        for d in 0..3 {
            partial[d] += edge_values[k][d];
        }
        let to = instance.edges()[k].to;
        let mut optimistic = partial;
        for d in 0..3 {
            optimistic[d] += bound[to][d];
        }
        let archive = archive_cell.borrow();
        !archive
            .iter()
            .any(|(v, _)| active.weakly_dominates(v, &partial) || active.dominates(v, &optimistic))
    };
    let complete = |path: &[usize]| {
        let values = sum(path);
        let mut archive = archive_cell.borrow_mut();
        if archive.iter().any(|(v, _)| active.dominates(v, &values)) {
            return;
        }
        archive.retain(|(v, _)| !active.dominates(&values, v));
        archive.push((values, path.to_vec()));
    };
    // Visit edges with the best optimistic totals first so that strong
    // members enter the archive early and prune more.
    let order: Option<Vec<Vec<usize>>> = prunable.then(|| {
        let scale: [f64; 3] = core::array::from_fn(|d| {
            let m = edge_values.iter().map(|v| v[d]).fold(0.0, f64::max);
            if m > 0.0 {
                m
            } else {
                1.0
            }
        });
        let key = |k: usize| -> f64 {
            let to = instance.edges()[k].to;
            active
                .dims()
                .map(|d| (edge_values[k][d] + bound[to][d]) / scale[d])
                .sum()
        };
        (0..instance.node_count())
            .map(|u| {
                let mut outs = instance.out_edges(u).to_vec();
                outs.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
                outs
            })
            .collect()
    });
    let plan = SearchPlan {
        max_paths,
        max_steps: Some(max_paths.saturating_mul(PARETO_STEPS_PER_PATH)),
        order: order.as_deref(),
    };
    let paths_examined = search_paths(instance, &plan, extend, complete)?;

    let mut members = archive
        .iter()
        .map(|(_, p)| scoring.evaluate(instance, p))
        .collect::<Result<Vec<_>>>()?;
    members.sort_by(|a, b| {
        let (va, vb) = (a.objective_values.as_array(), b.objective_values.as_array());
        va.iter()
            .zip(&vb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.edges.cmp(&b.edges))
    });
    Ok(ParetoSet {
        active,
        members,
        paths_examined,
    })
}

/// Exhaustive QUBO minimum. Assignments are scanned in lexicographic order
/// of `(x_0, x_1, ...)`, so among exact ties the smallest vector wins.
pub fn brute_force_qubo(model: &QuboModel) -> Result<(Vec<bool>, f64)> {
    let n = model.dimension();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::DimensionTooLarge {
            dimension: n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    // Variable k lives in bit (n - 1 - k) so numeric order is lexicographic.
    let bit = |k: usize| 1u32 << (n - 1 - k);
    let mut upper: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for &(k, l, v) in model.quadratic() {
        upper[k].push((bit(l), v));
    }
    let linear = model.linear();
    let mut best_mask = 0u32;
    let mut best = f64::INFINITY;
    for mask in 0..(1u32 << n) {
        let mut e = model.offset();
        for k in 0..n {
            if mask & bit(k) != 0 {
                e += linear[k];
                for &(b, v) in &upper[k] {
                    if mask & b != 0 {
                        e += v;
                    }
                }
            }
        }
        if e < best {
            best = e;
            best_mask = mask;
        }
    }
    let x = (0..n).map(|k| best_mask & bit(k) != 0).collect();
    Ok((x, best))
}
