//! Sub-network graphs: construction, hop-distance queries, random instances
//! and per-edge parameter sampling.
//!
//! Nodes are `0..node_count`. Edges are stored canonically as `(u, v)` with
//! `u < v`, sorted ascending; that order is also the iteration order used when
//! edge parameters are sampled.

mod generate;
mod sampling;
mod separation;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::generate_random_subnetwork;
pub use sampling::{sample_edge_states, DistributionKind, EdgeState, EdgeStates, ParameterDistribution};
pub use separation::{validate_separation, SeparationReport, DEFAULT_SEPARATION_THRESHOLD};

/// Sentinel distance for unreachable nodes in BFS tables.
pub const UNREACHABLE: usize = usize::MAX;

/// A connected simple graph with a distinguished gateway node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphRecord", into = "GraphRecord")]
pub struct SubNetworkGraph {
    id: String,
    node_count: usize,
    edges: Vec<(usize, usize)>,
    gateway: usize,
    coords: Option<Vec<[f64; 2]>>,
    adjacency: Vec<Vec<usize>>,
    edge_lookup: HashMap<(usize, usize), usize>,
}

/// Wire form of [`SubNetworkGraph`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRecord {
    id: String,
    node_count: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gateway: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<[f64; 2]>>,
}

impl TryFrom<GraphRecord> for SubNetworkGraph {
    type Error = Error;

    fn try_from(rec: GraphRecord) -> Result<Self> {
        let edges = rec.edges.into_iter().map(|[u, v]| (u, v)).collect();
        let mut g = SubNetworkGraph::new(rec.id, rec.node_count, edges, rec.gateway)?;
        if let Some(coords) = rec.coords {
            g = g.with_coords(coords)?;
        }
        Ok(g)
    }
}

impl From<SubNetworkGraph> for GraphRecord {
    fn from(g: SubNetworkGraph) -> Self {
        GraphRecord {
            id: g.id,
            node_count: g.node_count,
            edges: g.edges.into_iter().map(|(u, v)| [u, v]).collect(),
            gateway: Some(g.gateway),
            coords: g.coords,
        }
    }
}

impl SubNetworkGraph {
    /// Builds and validates a graph. Edges may be given in any order and
    /// orientation; self-loops, duplicates, out-of-range endpoints and
    /// disconnected graphs are rejected. With `gateway = None` the graph
    /// center is used (see [`select_gateway`]).
    pub fn new(
        id: impl Into<String>,
        node_count: usize,
        edges: Vec<(usize, usize)>,
        gateway: Option<usize>,
    ) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidGraph("node_count must be positive".into()));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a node outside 0..{node_count}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }

        let mut adjacency = vec![Vec::new(); node_count];
        let mut edge_lookup = HashMap::with_capacity(canon.len());
        for (idx, &(u, v)) in canon.iter().enumerate() {
            adjacency[u].push(v);
            adjacency[v].push(u);
            edge_lookup.insert((u, v), idx);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }

        let mut graph = SubNetworkGraph {
            id: id.into(),
            node_count,
            edges: canon,
            gateway: 0,
            coords: None,
            adjacency,
            edge_lookup,
        };
        if graph.bfs_distances(0).iter().any(|&d| d == UNREACHABLE) {
            return Err(Error::InvalidGraph(format!(
                "graph '{}' is not connected",
                graph.id
            )));
        }
        graph.gateway = match gateway {
            Some(g) if g < node_count => g,
            Some(g) => {
                return Err(Error::InvalidGraph(format!(
                    "gateway {g} is not a node of a {node_count}-node graph"
                )))
            }
            None => select_gateway(&graph),
        };
        Ok(graph)
    }

    pub fn with_coords(mut self, coords: Vec<[f64; 2]>) -> Result<Self> {
        if coords.len() != self.node_count {
            return Err(Error::InvalidGraph(format!(
                "{} coordinates given for {} nodes",
                coords.len(),
                self.node_count
            )));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    /// Overrides the gateway chosen at construction.
    pub fn with_gateway(mut self, gateway: usize) -> Result<Self> {
        if gateway >= self.node_count {
            return Err(Error::InvalidGraph(format!("gateway {gateway} out of range")));
        }
        self.gateway = gateway;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical sorted edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn gateway(&self) -> usize {
        self.gateway
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    /// Position of edge `{u, v}` in [`Self::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_lookup.get(&(u.min(v), u.max(v))).copied()
    }

    /// Hop distances from `source`; unreachable nodes hold [`UNREACHABLE`].
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.node_count];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn eccentricity(&self, node: usize) -> usize {
        self.bfs_distances(node).into_iter().max().unwrap_or(0)
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node < self.node_count {
            Ok(())
        } else {
            Err(Error::InvalidGraph(format!(
                "node {node} out of range 0..{}",
                self.node_count
            )))
        }
    }

    /// Hop-minimal path from `u` to `v`; among equally short paths the
    /// lexicographically smallest node sequence is returned.
    pub fn shortest_graph_path(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        self.check_node(u)?;
        self.check_node(v)?;
        let to_target = self.bfs_distances(v);
        walk_down(&self.adjacency, &to_target, u, v)
    }

    /// Worst-case hop count from any node to the gateway.
    pub fn gateway_eccentricity(&self) -> usize {
        self.eccentricity(self.gateway)
    }

    /// Aggregate parameters consumed by the cost model and the optimizer.
    pub fn profile(&self, eta_bare: f64) -> Result<SubNetworkProfile> {
        SubNetworkProfile::new(self.edge_count(), self.gateway_eccentricity().max(1), eta_bare)
    }
}

/// Greedy descent along `dist` (distances to `v`), always stepping to the
/// smallest neighbour one hop closer. This yields the lexicographically
/// smallest shortest path.
fn walk_down(adjacency: &[Vec<usize>], dist: &[usize], u: usize, v: usize) -> Result<Vec<usize>> {
    if dist[u] == UNREACHABLE {
        return Err(Error::Disconnected(u, v));
    }
    let mut path = Vec::with_capacity(dist[u] + 1);
    let mut cur = u;
    path.push(cur);
    while cur != v {
        // adjacency lists are sorted, so the first match is the smallest
        cur = *adjacency[cur]
            .iter()
            .find(|&&w| dist[w] + 1 == dist[cur])
            .expect("BFS layer structure");
        path.push(cur);
    }
    Ok(path)
}

/// Graph center: minimum eccentricity, ties to the smallest node index.
pub fn select_gateway(graph: &SubNetworkGraph) -> usize {
    (0..graph.node_count())
        .min_by_key(|&n| (graph.eccentricity(n), n))
        .unwrap_or(0)
}

/// All-pairs hop distances with lexicographic shortest-path reconstruction.
/// Built once per topology so that Monte Carlo sweeps do not repeat BFS.
#[derive(Debug, Clone)]
pub struct RoutingTable {
    n: usize,
    dist: Vec<usize>,
}

impl RoutingTable {
    pub fn new(graph: &SubNetworkGraph) -> Self {
        let n = graph.node_count();
        let mut dist = Vec::with_capacity(n * n);
        for target in 0..n {
            dist.extend(graph.bfs_distances(target));
        }
        RoutingTable { n, dist }
    }

    /// Distances to `target`, indexed by source.
    fn column(&self, target: usize) -> &[usize] {
        &self.dist[target * self.n..(target + 1) * self.n]
    }

    pub fn hops(&self, u: usize, v: usize) -> usize {
        self.column(v)[u]
    }

    pub fn path(&self, graph: &SubNetworkGraph, u: usize, v: usize) -> Result<Vec<usize>> {
        graph.check_node(u)?;
        graph.check_node(v)?;
        walk_down(&graph.adjacency, self.column(v), u, v)
    }
}

/// Aggregate sub-network parameters: edge count, gateway eccentricity and
/// single-attempt generation probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRecord", into = "ProfileRecord")]
pub struct SubNetworkProfile {
    edge_count: usize,
    l_max: usize,
    eta_bare: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileRecord {
    edge_count: usize,
    l_max: usize,
    eta_bare: f64,
}

impl TryFrom<ProfileRecord> for SubNetworkProfile {
    type Error = Error;
    fn try_from(r: ProfileRecord) -> Result<Self> {
        SubNetworkProfile::new(r.edge_count, r.l_max, r.eta_bare)
    }
}

impl From<SubNetworkProfile> for ProfileRecord {
    fn from(p: SubNetworkProfile) -> Self {
        ProfileRecord {
            edge_count: p.edge_count,
            l_max: p.l_max,
            eta_bare: p.eta_bare,
        }
    }
}

impl SubNetworkProfile {
    pub fn new(edge_count: usize, l_max: usize, eta_bare: f64) -> Result<Self> {
        if edge_count == 0 {
            return Err(Error::OutOfRange {
                name: "edge_count",
                value: 0.0,
                range: ">= 1",
            });
        }
        if l_max == 0 {
            return Err(Error::OutOfRange {
                name: "l_max",
                value: 0.0,
                range: ">= 1",
            });
        }
        if !(eta_bare > 0.0 && eta_bare < 1.0) {
            return Err(Error::OutOfRange {
                name: "eta_bare",
                value: eta_bare,
                range: "(0, 1)",
            });
        }
        Ok(SubNetworkProfile {
            edge_count,
            l_max,
            eta_bare,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn eta_bare(&self) -> f64 {
        self.eta_bare
    }
}

/// The inter-network link between two gateways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BackboneRecord", into = "BackboneRecord")]
pub struct Backbone {
    fidelity: f64,
    probability: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackboneRecord {
    fidelity: f64,
    probability: f64,
}

impl TryFrom<BackboneRecord> for Backbone {
    type Error = Error;
    fn try_from(r: BackboneRecord) -> Result<Self> {
        Backbone::new(r.fidelity, r.probability)
    }
}

impl From<Backbone> for BackboneRecord {
    fn from(b: Backbone) -> Self {
        BackboneRecord {
            fidelity: b.fidelity,
            probability: b.probability,
        }
    }
}

impl Backbone {
    /// `fidelity` must lie in (1/4, 1] and `probability` in (0, 1].
    pub fn new(fidelity: f64, probability: f64) -> Result<Self> {
        if !(fidelity > 0.25 && fidelity <= 1.0) {
            return Err(Error::BackboneTooWeak(fidelity));
        }
        if !(probability > 0.0 && probability <= 1.0) {
            return Err(Error::OutOfRange {
                name: "backbone probability",
                value: probability,
                range: "(0, 1]",
            });
        }
        Ok(Backbone {
            fidelity,
            probability,
        })
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> SubNetworkGraph {
        SubNetworkGraph::new("p", 3, vec![(0, 1), (1, 2)], None).unwrap()
    }

    fn triangle() -> SubNetworkGraph {
        SubNetworkGraph::new("t", 3, vec![(0, 1), (1, 2), (0, 2)], None).unwrap()
    }

    fn star(hub: usize, n: usize) -> SubNetworkGraph {
        let edges = (0..n).filter(|&i| i != hub).map(|i| (hub, i)).collect();
        SubNetworkGraph::new("s", n, edges, None).unwrap()
    }

    #[test]
    fn gateway_is_graph_center() {
        assert_eq!(path3().gateway(), 1);
        assert_eq!(star(3, 6).gateway(), 3);
        assert_eq!(triangle().gateway(), 0);
    }

    #[test]
    fn shortest_paths() {
        assert_eq!(triangle().shortest_graph_path(0, 1).unwrap(), vec![0, 1]);
        assert_eq!(path3().shortest_graph_path(0, 2).unwrap(), vec![0, 1, 2]);
        assert_eq!(path3().shortest_graph_path(2, 2).unwrap(), vec![2]);
        let cycle = SubNetworkGraph::new("c", 4, vec![(0, 1), (1, 2), (2, 3), (3, 0)], None).unwrap();
        // both [0,1,2] and [0,3,2] have two hops
        assert_eq!(cycle.shortest_graph_path(0, 2).unwrap(), vec![0, 1, 2]);
        assert_eq!(cycle.shortest_graph_path(2, 0).unwrap(), vec![2, 1, 0]);
        assert!(cycle.shortest_graph_path(0, 9).is_err());
    }

    #[test]
    fn eccentricity_from_gateway() {
        let p = path3().with_gateway(0).unwrap();
        assert_eq!(p.gateway_eccentricity(), 2);
        assert_eq!(star(0, 5).gateway_eccentricity(), 1);
    }

    #[test]
    fn rejects_invalid_graphs() {
        assert!(SubNetworkGraph::new("x", 3, vec![(0, 0)], None).is_err());
        assert!(SubNetworkGraph::new("x", 3, vec![(0, 1), (1, 0), (1, 2)], None).is_err());
        assert!(SubNetworkGraph::new("x", 3, vec![(0, 1)], None).is_err());
        assert!(SubNetworkGraph::new("x", 2, vec![(0, 2)], None).is_err());
        assert!(SubNetworkGraph::new("x", 2, vec![(0, 1)], Some(5)).is_err());
        assert!(SubNetworkGraph::new("x", 0, vec![], None).is_err());
    }

    #[test]
    fn json_is_canonical() {
        let g = SubNetworkGraph::new("t", 3, vec![(2, 1), (1, 0), (2, 0)], None).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"id":"t","node_count":3,"edges":[[0,1],[0,2],[1,2]],"gateway":0}"#);
        let back: SubNetworkGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"id":"t","node_count":3,"edges":[[0,1]],"gateway":0}"#;
        assert!(serde_json::from_str::<SubNetworkGraph>(bad).is_err());
        let unknown = r#"{"id":"t","node_count":2,"edges":[[0,1]],"colour":1}"#;
        assert!(serde_json::from_str::<SubNetworkGraph>(unknown).is_err());
    }

    #[test]
    fn routing_table_matches_direct_bfs() {
        let cycle = SubNetworkGraph::new(
            "c",
            6,
            vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)],
            None,
        )
        .unwrap();
        let table = RoutingTable::new(&cycle);
        for u in 0..6 {
            for v in 0..6 {
                let direct = cycle.shortest_graph_path(u, v).unwrap();
                assert_eq!(table.path(&cycle, u, v).unwrap(), direct);
                assert_eq!(table.hops(u, v), direct.len() - 1);
            }
        }
    }

    #[test]
    fn profile_and_backbone_validation() {
        assert!(SubNetworkProfile::new(0, 1, 0.1).is_err());
        assert!(SubNetworkProfile::new(1, 0, 0.1).is_err());
        assert!(SubNetworkProfile::new(1, 1, 1.0).is_err());
        assert!(Backbone::new(0.25, 1.0).is_err());
        assert!(Backbone::new(0.9, 0.0).is_err());
        assert!(Backbone::new(1.0, 1.0).is_ok());
        let p = path3().profile(0.1).unwrap();
        assert_eq!((p.edge_count(), p.l_max()), (2, 1));
    }
}
