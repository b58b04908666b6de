//! Edge selections, their feasibility and their objective totals.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::NetworkInstance;
use crate::objectives::{scalarize, EdgeCosts, EdgeObjectives, Normalization, ScalarWeights};
use crate::qubo::VariableMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Classification {
    Infeasible,
    /// Satisfies the degree equations but carries cycles beside the path.
    FeasibleFlowWithCycles,
    SimplePath,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Infeasible => "infeasible",
            Classification::FeasibleFlowWithCycles => "feasible_flow_with_cycles",
            Classification::SimplePath => "simple_path",
        }
    }

    pub fn is_feasible(&self) -> bool {
        *self != Classification::Infeasible
    }
}

/// Objective totals of a route, in `(loss, ber, hops)` order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObjectiveValues {
    pub loss: f64,
    pub ber: f64,
    pub hops: f64,
}

impl ObjectiveValues {
    pub fn as_array(&self) -> [f64; 3] {
        [self.loss, self.ber, self.hops]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteSolution {
    /// Selected instance edge indices, ascending.
    pub edges: Vec<usize>,
    pub is_feasible_flow: bool,
    pub is_simple_path: bool,
    pub objective_values: ObjectiveValues,
    pub scalar_value: f64,
}

impl RouteSolution {
    pub fn classification(&self) -> Classification {
        if self.is_simple_path {
            Classification::SimplePath
        } else if self.is_feasible_flow {
            Classification::FeasibleFlowWithCycles
        } else {
            Classification::Infeasible
        }
    }

    /// Node sequence of a simple path, `None` otherwise.
    pub fn node_sequence(&self, instance: &NetworkInstance) -> Option<Vec<usize>> {
        if !self.is_simple_path {
            return None;
        }
        let mut seq = vec![instance.source()];
        let mut cur = instance.source();
        while cur != instance.destination() {
            let e = self
                .edges
                .iter()
                .find(|&&k| instance.edges()[k].from == cur)?;
            cur = instance.edges()[*e].to;
            seq.push(cur);
        }
        Some(seq)
    }
}

/// Per-edge objectives plus the scalarized cost each edge contributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Scoring {
    pub objectives: EdgeObjectives,
    pub weights: ScalarWeights,
    pub costs: EdgeCosts,
}

impl Scoring {
    pub fn new(
        objectives: EdgeObjectives,
        weights: ScalarWeights,
        normalization: Normalization,
    ) -> Result<Self> {
        let costs = scalarize(&objectives, &weights, normalization)?;
        Ok(Self {
            objectives,
            weights,
            costs,
        })
    }

    pub fn cost(&self, edge: usize) -> f64 {
        self.costs.costs[edge]
    }

    /// Builds the solution record for an arbitrary edge set.
    pub fn evaluate(&self, instance: &NetworkInstance, edges: &[usize]) -> Result<RouteSolution> {
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        edges.dedup();
        if let Some(&e) = edges.iter().find(|&&e| e >= instance.edge_count()) {
            return Err(Error::DimensionMismatch {
                expected: instance.edge_count(),
                found: e + 1,
            });
        }
        let (is_feasible_flow, is_simple_path) = check_route(instance, &edges);
        let mut v = ObjectiveValues::default();
        let mut scalar = 0.0;
        for &e in &edges {
            let [l, b, h] = self.objectives.values(e);
            v.loss += l;
            v.ber += b;
            v.hops += h;
            scalar += self.cost(e);
        }
        Ok(RouteSolution {
            edges,
            is_feasible_flow,
            is_simple_path,
            objective_values: v,
            scalar_value: scalar,
        })
    }
}

/// Returns `(flow_feasible, simple_path)` for a deduplicated edge set.
///
/// Flow feasibility: one edge leaves the source, one enters the destination,
/// nothing enters the source or leaves the destination, and every other
/// node is balanced. A simple path is a feasible flow whose edges are all
/// consumed by the walk from the source.
pub fn check_route(instance: &NetworkInstance, edges: &[usize]) -> (bool, bool) {
    let n = instance.node_count();
    let mut out = vec![0usize; n];
    let mut inn = vec![0usize; n];
    for &k in edges {
        let e = instance.edges()[k];
        out[e.from] += 1;
        inn[e.to] += 1;
    }
    let (s, d) = (instance.source(), instance.destination());
    let flow = out[s] == 1
        && inn[s] == 0
        && inn[d] == 1
        && out[d] == 0
        && (0..n).all(|i| i == s || i == d || out[i] == inn[i]);
    if !flow {
        return (false, false);
    }
    let mut visited = vec![false; n];
    let mut cur = s;
    let mut walked = 0;
    visited[s] = true;
    while cur != d {
        if out[cur] != 1 {
            return (true, false);
        }
        let next = edges
            .iter()
            .map(|&k| instance.edges()[k])
            .find(|e| e.from == cur)
            .map(|e| e.to)
            .expect("out-degree counted above");
        if visited[next] {
            return (true, false);
        }
        visited[next] = true;
        walked += 1;
        cur = next;
    }
    (true, walked == edges.len())
}

/// Reads edges from spins (`x_k = (sigma_k + 1) / 2`) and scores them.
pub fn decode(
    spins: &[i8],
    map: &VariableMap,
    instance: &NetworkInstance,
    scoring: &Scoring,
) -> Result<RouteSolution> {
    if spins.len() != map.len() {
        return Err(Error::DimensionMismatch {
            expected: map.len(),
            found: spins.len(),
        });
    }
    let edges: Vec<usize> = spins
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0)
        .map(|(v, _)| map.edge(v))
        .collect();
    scoring.evaluate(instance, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Edge, Node};
    use crate::objectives::RadioConfig;

    /// 0 -> 1 -> 2 -> 5 with a side loop 3 <-> 4 and chord 1 -> 3.
    fn instance() -> NetworkInstance {
        let nodes = (0..6)
            .map(|id| Node {
                id,
                position: [id as f64 * 10.0, (id % 2) as f64],
                noise_power: 1e-12,
            })
            .collect();
        let e = |from, to| Edge { from, to };
        NetworkInstance::new(
            nodes,
            vec![
                e(0, 1),
                e(1, 2),
                e(2, 5),
                e(3, 4),
                e(4, 3),
                e(1, 3),
                e(3, 1),
                e(2, 1),
            ],
            0,
            5,
        )
        .unwrap()
    }

    fn scoring(g: &NetworkInstance) -> Scoring {
        let objs = EdgeObjectives::compute(g, &RadioConfig::default()).unwrap();
        Scoring::new(
            objs,
            ScalarWeights::new(0.0, 0.0, 1.0).unwrap(),
            Normalization::Max,
        )
        .unwrap()
    }

    fn idx(g: &NetworkInstance, pairs: &[(usize, usize)]) -> Vec<usize> {
        pairs
            .iter()
            .map(|&(a, b)| g.edge_index(a, b).unwrap())
            .collect()
    }

    #[test]
    fn path_is_simple() {
        let g = instance();
        let sc = scoring(&g);
        let r = sc
            .evaluate(&g, &idx(&g, &[(0, 1), (1, 2), (2, 5)]))
            .unwrap();
        assert_eq!(r.classification(), Classification::SimplePath);
        assert_eq!(r.objective_values.hops, 3.0);
        assert_eq!(r.scalar_value, 3.0);
        assert_eq!(r.node_sequence(&g), Some(vec![0, 1, 2, 5]));
    }

    #[test]
    fn disjoint_two_cycle_is_flow_feasible_only() {
        let g = instance();
        let sc = scoring(&g);
        let r = sc
            .evaluate(&g, &idx(&g, &[(0, 1), (1, 2), (2, 5), (3, 4), (4, 3)]))
            .unwrap();
        assert_eq!(r.classification(), Classification::FeasibleFlowWithCycles);
        assert!(r.node_sequence(&g).is_none());
    }

    #[test]
    fn attached_cycle_is_flow_feasible_only() {
        let g = instance();
        let sc = scoring(&g);
        let r = sc
            .evaluate(&g, &idx(&g, &[(0, 1), (1, 2), (2, 5), (1, 3), (3, 1)]))
            .unwrap();
        assert_eq!(r.classification(), Classification::FeasibleFlowWithCycles);
    }

    #[test]
    fn broken_selections_are_infeasible() {
        let g = instance();
        let sc = scoring(&g);
        for sel in [
            vec![],
            idx(&g, &[(0, 1), (1, 2)]),
            idx(&g, &[(0, 1), (2, 5)]),
        ] {
            let r = sc.evaluate(&g, &sel).unwrap();
            assert_eq!(r.classification(), Classification::Infeasible);
        }
    }

    #[test]
    fn decode_spins() {
        let g = instance();
        let sc = scoring(&g);
        let map = VariableMap::routing(&g);
        let path = idx(&g, &[(0, 1), (1, 2), (2, 5)]);
        let x = map.indicator(&path).unwrap();
        let spins: Vec<i8> = x.iter().map(|&b| if b { 1 } else { -1 }).collect();
        let r = decode(&spins, &map, &g, &sc).unwrap();
        assert_eq!(r.classification(), Classification::SimplePath);
        assert_eq!(r.edges, {
            let mut p = path.clone();
            p.sort();
            p
        });

        let none = vec![-1; map.len()];
        let r = decode(&none, &map, &g, &sc).unwrap();
        assert!(r.edges.is_empty());
        assert_eq!(r.classification(), Classification::Infeasible);

        assert!(decode(&[1], &map, &g, &sc).is_err());
    }
}
