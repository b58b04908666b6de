//! Directed geometric network model and random instance generation.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: usize,
    /// Position in meters.
    pub position: [f64; 2],
    /// Average noise power in watts.
    pub noise_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

/// Immutable directed graph with per-node noise and a source/destination
/// pair. Nodes are indexed densely by id and edges are kept sorted by
/// `(from, to)`, so edge indices are stable for a given edge set.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    source: usize,
    destination: usize,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl NetworkInstance {
    /// Validates and assembles an instance. Node ids must be exactly
    /// `0..nodes.len()` (in any order). Reachability of the destination is
    /// not required here; see [`NetworkInstance::ensure_routable`].
    pub fn new(
        mut nodes: Vec<Node>,
        mut edges: Vec<Edge>,
        source: usize,
        destination: usize,
    ) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::InvalidNetwork(format!(
                    "node ids must be 0..{} without gaps or repeats",
                    nodes.len()
                )));
            }
            if !(n.noise_power > 0.0) || !n.noise_power.is_finite() {
                return Err(Error::InvalidNetwork(format!(
                    "node {} has non-positive noise power",
                    n.id
                )));
            }
            if !n.position.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "node {} has a non-finite position",
                    n.id
                )));
            }
        }
        let n = nodes.len();
        for id in [source, destination] {
            if id >= n {
                return Err(Error::UnknownNode(id));
            }
        }
        if source == destination {
            return Err(Error::InvalidNetwork("source equals destination".into()));
        }
        for e in &edges {
            for id in [e.from, e.to] {
                if id >= n {
                    return Err(Error::UnknownNode(id));
                }
            }
            if e.from == e.to {
                return Err(Error::InvalidNetwork(format!(
                    "self-loop at node {}",
                    e.from
                )));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidNetwork(format!(
                "duplicate edge {} -> {}",
                w[0].from, w[0].to
            )));
        }

        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            out_edges[e.from].push(k);
            in_edges[e.to].push(k);
        }
        Ok(Self {
            nodes,
            edges,
            source,
            destination,
            out_edges,
            in_edges,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn destination(&self) -> usize {
        self.destination
    }

    /// Indices of edges leaving `node`, in ascending order.
    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    /// Indices of edges entering `node`, in ascending order.
    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    pub fn edge_index(&self, from: usize, to: usize) -> Option<usize> {
        self.edges.binary_search(&Edge { from, to }).ok()
    }

    /// Euclidean length of edge `k` in meters.
    pub fn edge_length(&self, k: usize) -> f64 {
        let e = self.edges[k];
        let [ax, ay] = self.nodes[e.from].position;
        let [bx, by] = self.nodes[e.to].position;
        libm::hypot(bx - ax, by - ay)
    }

    /// Whether edge `k` may carry a route: routes never enter the source or
    /// leave the destination.
    pub fn is_routing_edge(&self, k: usize) -> bool {
        let e = self.edges[k];
        e.to != self.source && e.from != self.destination
    }

    pub fn is_destination_reachable(&self) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([self.source]);
        seen[self.source] = true;
        while let Some(u) = queue.pop_front() {
            if u == self.destination {
                return true;
            }
            for &k in &self.out_edges[u] {
                let v = self.edges[k].to;
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        false
    }

    pub fn ensure_routable(&self) -> Result<()> {
        if self.is_destination_reachable() {
            Ok(())
        } else {
            Err(Error::DestinationUnreachable)
        }
    }
}

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    libm::pow(10.0, (dbm - 30.0) / 10.0)
}

/// Average edge counts per node count of the reference experiment scales.
pub const REFERENCE_SCALES: [(usize, f64); 6] = [
    (10, 30.0),
    (20, 125.0),
    (30, 280.0),
    (40, 420.0),
    (50, 700.0),
    (60, 1000.0),
];

/// Mean directed edge count targeted for `node_count` nodes. Between the
/// reference scales the pair density is interpolated linearly; outside them
/// the nearest density is used.
pub fn reference_mean_edges(node_count: usize) -> f64 {
    let density = |&(n, m): &(usize, f64)| m / (n * (n - 1)) as f64;
    let first = REFERENCE_SCALES[0];
    let last = REFERENCE_SCALES[REFERENCE_SCALES.len() - 1];
    let pairs = (node_count * node_count.saturating_sub(1)) as f64;
    let d = if node_count <= first.0 {
        density(&first)
    } else if node_count >= last.0 {
        density(&last)
    } else {
        let i = REFERENCE_SCALES
            .iter()
            .position(|&(n, _)| n >= node_count)
            .unwrap();
        let (lo, hi) = (REFERENCE_SCALES[i - 1], REFERENCE_SCALES[i]);
        let t = (node_count - lo.0) as f64 / (hi.0 - lo.0) as f64;
        density(&lo) + t * (density(&hi) - density(&lo))
    };
    d * pairs
}

/// Probability that two points drawn uniformly in the unit square lie
/// within distance `rho` of each other, for `0 <= rho <= 1`.
pub fn pair_connection_probability(rho: f64) -> f64 {
    let rho = rho.clamp(0.0, 1.0);
    let r2 = rho * rho;
    core::f64::consts::PI * r2 - 8.0 / 3.0 * r2 * rho + 0.5 * r2 * r2
}

/// Connection radius at which a uniform geometric digraph on `node_count`
/// nodes in a square of side `area_side` has `mean_edges` directed edges in
/// expectation.
pub fn radius_for_mean_edges(node_count: usize, mean_edges: f64, area_side: f64) -> f64 {
    let pairs = (node_count * node_count.saturating_sub(1)) as f64;
    let target = mean_edges / pairs;
    if target >= pair_connection_probability(1.0) {
        return area_side * core::f64::consts::SQRT_2;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pair_connection_probability(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) * area_side
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub node_count: usize,
    /// Meters.
    pub connection_radius: f64,
    /// Side of the square placement area, meters.
    pub area_side: f64,
    pub noise_mean_dbm: f64,
    pub noise_stddev_dbm: f64,
    pub seed: u64,
    /// Regeneration attempts after the first when the destination is
    /// unreachable.
    pub max_retries: usize,
    pub source: Option<usize>,
    pub destination: Option<usize>,
}

impl GeneratorConfig {
    pub const DEFAULT_AREA_SIDE: f64 = 1000.0;

    pub fn new(node_count: usize, connection_radius: f64, seed: u64) -> Self {
        Self {
            node_count,
            connection_radius,
            area_side: Self::DEFAULT_AREA_SIDE,
            noise_mean_dbm: -90.0,
            noise_stddev_dbm: 10.0,
            seed,
            max_retries: 100,
            source: None,
            destination: None,
        }
    }

    /// Radius calibrated so the expected edge count follows
    /// [`reference_mean_edges`].
    pub fn reference(node_count: usize, seed: u64) -> Self {
        let side = Self::DEFAULT_AREA_SIDE;
        let r = radius_for_mean_edges(node_count, reference_mean_edges(node_count), side);
        Self::new(node_count, r, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::InvalidConfig("node_count must be at least 2".into()));
        }
        if !(self.connection_radius > 0.0) {
            return Err(Error::InvalidConfig(
                "connection_radius must be positive".into(),
            ));
        }
        if !(self.area_side > 0.0) {
            return Err(Error::InvalidConfig("area_side must be positive".into()));
        }
        if !(self.noise_stddev_dbm >= 0.0) || !self.noise_mean_dbm.is_finite() {
            return Err(Error::InvalidConfig("invalid noise distribution".into()));
        }
        for id in [self.source, self.destination].into_iter().flatten() {
            if id >= self.node_count {
                return Err(Error::UnknownNode(id));
            }
        }
        Ok(())
    }
}

/// Samples a uniform random geometric digraph. Both directions of every pair
/// within `connection_radius` become edges. Unroutable draws are discarded
/// and redrawn from the same stream, so the result depends only on `config`.
pub fn generate_instance(config: &GeneratorConfig) -> Result<NetworkInstance> {
    config.validate()?;
    let mut rng = seed::rng(config.seed);
    let noise = Normal::new(config.noise_mean_dbm, config.noise_stddev_dbm)
        .map_err(|_| Error::InvalidConfig("invalid noise distribution".into()))?;
    let n = config.node_count;
    let r2 = config.connection_radius * config.connection_radius;

    for _ in 0..=config.max_retries {
        let nodes: Vec<Node> = (0..n)
            .map(|id| {
                let x = rng.random::<f64>() * config.area_side;
                let y = rng.random::<f64>() * config.area_side;
                let dbm: f64 = noise.sample(&mut rng);
                Node {
                    id,
                    position: [x, y],
                    noise_power: dbm_to_watts(dbm),
                }
            })
            .collect();

        let mut edges = Vec::new();
        let mut out_deg = vec![0usize; n];
        let mut in_deg = vec![0usize; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let dx = nodes[i].position[0] - nodes[j].position[0];
                let dy = nodes[i].position[1] - nodes[j].position[1];
                if dx * dx + dy * dy <= r2 {
                    edges.push(Edge { from: i, to: j });
                    out_deg[i] += 1;
                    in_deg[j] += 1;
                }
            }
        }

        let source = config.source.or_else(|| (0..n).find(|&i| out_deg[i] > 0));
        let destination = config
            .destination
            .or_else(|| (0..n).rev().find(|&i| in_deg[i] > 0));
        let (Some(s), Some(d)) = (source, destination) else {
            continue;
        };
        if s == d {
            continue;
        }
        let instance = NetworkInstance::new(nodes, edges, s, d)?;
        if instance.is_destination_reachable() {
            return Ok(instance);
        }
    }
    Err(Error::GenerationFailed {
        attempts: config.max_retries + 1,
    })
}
