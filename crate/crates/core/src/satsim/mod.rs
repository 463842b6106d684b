//! Random connection demands over sub-networks joined by the backbone, and
//! the fraction of them that meet the task thresholds.
//!
//! Intra-network demands follow the shortest graph path. Inter-network
//! demands travel from the source to its gateway, across the backbone and
//! from the far gateway to the destination.

mod sweep;

pub use sweep::{sweep_transition, SweepResult, SweepRow, SweepSpec};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::costs::TaskThresholds;
use crate::entanglement::{chain_fidelity, chain_probability, secure_key_rate, KeyRateParams};
use crate::error::{Error, Result};
use crate::netmodel::{Backbone, EdgeStates, RoutingTable, SubNetworkGraph};
use crate::seeds::rng_from_seed;

/// Acceptance rule for a demand.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// End-to-end fidelity and probability both reach their thresholds.
    #[default]
    Threshold,
    /// Secure key rate reaches the key-rate target.
    Keyrate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemandKind {
    Intra,
    Inter,
}

/// A node addressed by sub-network index and local node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Endpoint {
    pub network: usize,
    pub node: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demand {
    pub source: Endpoint,
    pub destination: Endpoint,
    pub kind: DemandKind,
}

impl Demand {
    pub fn new(source: Endpoint, destination: Endpoint) -> Result<Self> {
        if source == destination {
            return Err(Error::InvalidDemand(format!(
                "source and destination are both {source:?}"
            )));
        }
        let kind = if source.network == destination.network {
            DemandKind::Intra
        } else {
            DemandKind::Inter
        };
        Ok(Demand {
            source,
            destination,
            kind,
        })
    }
}

/// Sub-network graphs with their precomputed routing tables.
#[derive(Debug, Clone)]
pub struct Topology {
    networks: Vec<SubNetworkGraph>,
    routing: Vec<RoutingTable>,
}

impl Topology {
    pub fn new(networks: Vec<SubNetworkGraph>) -> Result<Self> {
        if networks.is_empty() {
            return Err(Error::Empty("network list"));
        }
        let routing = networks.iter().map(RoutingTable::new).collect();
        Ok(Topology { networks, routing })
    }

    pub fn networks(&self) -> &[SubNetworkGraph] {
        &self.networks
    }

    fn check(&self, e: Endpoint) -> Result<()> {
        match self.networks.get(e.network) {
            Some(g) if e.node < g.node_count() => Ok(()),
            _ => Err(Error::InvalidDemand(format!("endpoint {e:?} does not exist"))),
        }
    }

    /// Edge indices along the shortest path `u -> v` inside one network.
    fn segment(&self, network: usize, u: usize, v: usize) -> Result<(Vec<Endpoint>, Vec<usize>)> {
        let g = &self.networks[network];
        let nodes = self.routing[network].path(g, u, v)?;
        let edges = nodes
            .windows(2)
            .map(|w| g.edge_index(w[0], w[1]).expect("path follows edges"))
            .collect();
        let nodes = nodes.into_iter().map(|node| Endpoint { network, node }).collect();
        Ok((nodes, edges))
    }

    /// Fixed route of a demand; independent of edge states.
    pub fn route(&self, demand: &Demand) -> Result<Route> {
        self.check(demand.source)?;
        self.check(demand.destination)?;
        let (s, d) = (demand.source, demand.destination);
        if s.network == d.network {
            let (nodes, edges) = self.segment(s.network, s.node, d.node)?;
            return Ok(Route {
                nodes,
                near: (s.network, edges),
                far: None,
            });
        }
        let ga = self.networks[s.network].gateway();
        let gb = self.networks[d.network].gateway();
        let (mut nodes, near) = self.segment(s.network, s.node, ga)?;
        let (far_nodes, far) = self.segment(d.network, gb, d.node)?;
        nodes.extend(far_nodes);
        Ok(Route {
            nodes,
            near: (s.network, near),
            far: Some((d.network, far)),
        })
    }
}

/// Route of a demand: edges in the source network and, for inter-network
/// demands, the backbone followed by edges in the destination network.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    /// Visited nodes; for inter demands the backbone joins the two gateways.
    pub nodes: Vec<Endpoint>,
    near: (usize, Vec<usize>),
    far: Option<(usize, Vec<usize>)>,
}

impl Route {
    /// Number of links including the backbone.
    pub fn hop_count(&self) -> usize {
        self.near.1.len() + self.far.as_ref().map_or(0, |(_, e)| e.len() + 1)
    }
}

/// Evaluated demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandOutcome {
    pub demand: Demand,
    pub path: Vec<Endpoint>,
    pub fidelity: f64,
    pub probability: f64,
    /// Present whenever the thresholds carry a key-rate target.
    pub key_rate: Option<f64>,
    pub satisfied: bool,
}

/// End-to-end parameters of a route under given edge states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assessment {
    pub fidelity: f64,
    pub probability: f64,
    pub key_rate: Option<f64>,
    pub satisfied: bool,
}

/// Backbone, thresholds and acceptance rule shared by all demands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criteria {
    pub backbone: Backbone,
    pub thresholds: TaskThresholds,
    pub mode: Mode,
}

impl Criteria {
    pub fn new(backbone: Backbone, thresholds: TaskThresholds, mode: Mode) -> Result<Self> {
        match mode {
            Mode::Threshold => {
                thresholds.require_fidelity()?;
                thresholds.require_probability()?;
            }
            Mode::Keyrate => {
                if thresholds.key_rate().is_none() {
                    return Err(Error::Unsupported("keyrate mode needs a key rate target".into()));
                }
            }
        }
        Ok(Criteria {
            backbone,
            thresholds,
            mode,
        })
    }

    /// Judges a route given per-network edge states.
    pub fn judge(&self, route: &Route, states: &[EdgeStates]) -> Result<Assessment> {
        let mut fs = Vec::with_capacity(route.hop_count());
        let mut ps = Vec::with_capacity(route.hop_count());
        let (net, edges) = &route.near;
        let st = states.get(*net).ok_or(Error::Empty("edge states"))?;
        for &e in edges {
            let s = *st.0.get(e).ok_or(Error::Empty("edge states"))?;
            fs.push(s.fidelity);
            ps.push(s.probability);
        }
        if let Some((net, edges)) = &route.far {
            fs.push(self.backbone.fidelity());
            ps.push(self.backbone.probability());
            let st = states.get(*net).ok_or(Error::Empty("edge states"))?;
            for &e in edges {
                let s = *st.0.get(e).ok_or(Error::Empty("edge states"))?;
                fs.push(s.fidelity);
                ps.push(s.probability);
            }
        }
        let f = chain_fidelity(&fs)?;
        let p = chain_probability(&ps)?;
        let rate = match self.thresholds.key_rate() {
            Some(k) => Some(secure_key_rate(&KeyRateParams::new(k.rep_rate, p)?, f)?),
            None => None,
        };
        let satisfied = match self.mode {
            Mode::Threshold => {
                f >= self.thresholds.require_fidelity()? && p >= self.thresholds.require_probability()?
            }
            Mode::Keyrate => rate.unwrap_or(0.0) >= self.thresholds.key_rate().map_or(0.0, |k| k.min_rate),
        };
        Ok(Assessment {
            fidelity: f,
            probability: p,
            key_rate: rate,
            satisfied,
        })
    }
}

/// Routes and judges a single demand.
pub fn evaluate_demand(
    topology: &Topology,
    states: &[EdgeStates],
    criteria: &Criteria,
    demand: &Demand,
) -> Result<DemandOutcome> {
    let route = topology.route(demand)?;
    let a = criteria.judge(&route, states)?;
    Ok(DemandOutcome {
        demand: *demand,
        path: route.nodes,
        fidelity: a.fidelity,
        probability: a.probability,
        key_rate: a.key_rate,
        satisfied: a.satisfied,
    })
}

/// Fraction of satisfied demands.
pub fn p_sat(
    topology: &Topology,
    states: &[EdgeStates],
    criteria: &Criteria,
    demands: &[Demand],
) -> Result<f64> {
    if demands.is_empty() {
        return Err(Error::Empty("demand list"));
    }
    let mut ok = 0usize;
    for d in demands {
        if evaluate_demand(topology, states, criteria, d)?.satisfied {
            ok += 1;
        }
    }
    Ok(ok as f64 / demands.len() as f64)
}

/// Demand counts per network: `round(r * count)` inter demands, the rest
/// split evenly with leftovers going to the networks with most nodes.
pub fn demand_split(topology: &Topology, count: usize, ratio: f64) -> Result<(usize, Vec<usize>)> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::OutOfRange {
            name: "demand ratio",
            value: ratio,
            range: "[0, 1]",
        });
    }
    let n = topology.networks.len();
    let inter = (ratio * count as f64).round() as usize;
    if inter > 0 && n < 2 {
        return Err(Error::InvalidDemand("inter-network demands need two networks".into()));
    }
    let intra = count - inter;
    let mut per = vec![intra / n; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(topology.networks[i].node_count()), i));
    for &i in order.iter().take(intra % n) {
        per[i] += 1;
    }
    for (i, &k) in per.iter().enumerate() {
        if k > 0 && topology.networks[i].node_count() < 2 {
            return Err(Error::InvalidDemand(format!(
                "network {i} has a single node but {k} intra demands"
            )));
        }
    }
    Ok((inter, per))
}

/// Random demands: inter demands first, then intra demands network by
/// network. Endpoints are uniform; pairs may repeat across demands.
pub fn generate_demands(topology: &Topology, count: usize, ratio: f64, seed: u64) -> Result<Vec<Demand>> {
    if count == 0 {
        return Err(Error::Empty("demand list"));
    }
    let (inter, per) = demand_split(topology, count, ratio)?;
    let nets = &topology.networks;
    let n = nets.len();
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..inter {
        let a = rng.gen_range(0..n);
        let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
        let s = Endpoint {
            network: a,
            node: rng.gen_range(0..nets[a].node_count()),
        };
        let d = Endpoint {
            network: b,
            node: rng.gen_range(0..nets[b].node_count()),
        };
        out.push(Demand::new(s, d)?);
    }
    for (net, &k) in per.iter().enumerate() {
        let size = nets[net].node_count();
        for _ in 0..k {
            let u = rng.gen_range(0..size);
            let v = (u + 1 + rng.gen_range(0..size - 1)) % size;
            out.push(Demand::new(
                Endpoint { network: net, node: u },
                Endpoint { network: net, node: v },
            )?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::KeyRateTarget;
    use crate::netmodel::EdgeState;

    fn triangles() -> Topology {
        let t = |id: &str| SubNetworkGraph::new(id, 3, vec![(0, 1), (1, 2), (0, 2)], Some(0)).unwrap();
        Topology::new(vec![t("a"), t("b")]).unwrap()
    }

    fn criteria(mode: Mode) -> Criteria {
        let th = TaskThresholds::new(
            Some(0.9),
            Some(0.016),
            Some(KeyRateTarget {
                min_rate: 1e3,
                rep_rate: 1e6,
            }),
        )
        .unwrap();
        Criteria::new(Backbone::new(1.0, 1.0).unwrap(), th, mode).unwrap()
    }

    #[test]
    fn split_counts() {
        let t = triangles();
        assert_eq!(demand_split(&t, 50, 0.0).unwrap(), (0, vec![25, 25]));
        assert_eq!(demand_split(&t, 50, 1.0).unwrap(), (50, vec![0, 0]));
        assert_eq!(demand_split(&t, 100, 0.3).unwrap(), (30, vec![35, 35]));
        assert_eq!(demand_split(&t, 10, 0.3).unwrap(), (3, vec![4, 3]));
    }

    #[test]
    fn leftover_goes_to_larger_network() {
        let small = SubNetworkGraph::new("s", 2, vec![(0, 1)], None).unwrap();
        let big = SubNetworkGraph::new("b", 3, vec![(0, 1), (1, 2)], None).unwrap();
        let t = Topology::new(vec![small, big]).unwrap();
        assert_eq!(demand_split(&t, 5, 0.0).unwrap(), (0, vec![2, 3]));
    }

    #[test]
    fn generated_demands_are_well_formed() {
        let t = triangles();
        let d = generate_demands(&t, 100, 0.3, 9).unwrap();
        assert_eq!(d.len(), 100);
        assert_eq!(d.iter().filter(|x| x.kind == DemandKind::Inter).count(), 30);
        for x in &d {
            assert_ne!(x.source, x.destination);
            assert_eq!(x.kind == DemandKind::Inter, x.source.network != x.destination.network);
        }
        assert_eq!(d, generate_demands(&t, 100, 0.3, 9).unwrap());
    }

    #[test]
    fn single_node_network_cannot_host_intra_demands() {
        let one = SubNetworkGraph::new("one", 1, vec![], None).unwrap();
        let t = Topology::new(vec![one.clone(), one]).unwrap();
        assert!(generate_demands(&t, 4, 0.5, 1).is_err());
        assert!(generate_demands(&t, 4, 1.0, 1).is_ok());
    }

    #[test]
    fn perfect_edges_satisfy_everything() {
        let t = triangles();
        let states: Vec<_> = t
            .networks()
            .iter()
            .map(|g| EdgeStates::uniform(g, EdgeState::new(1.0, 1.0).unwrap()))
            .collect();
        let d = generate_demands(&t, 40, 0.5, 2).unwrap();
        for mode in [Mode::Threshold, Mode::Keyrate] {
            assert_eq!(p_sat(&t, &states, &criteria(mode), &d).unwrap(), 1.0);
        }
    }

    #[test]
    fn absorbing_edge_fails() {
        let t = triangles();
        let mut a = EdgeStates::uniform(&t.networks()[0], EdgeState::new(1.0, 1.0).unwrap());
        a.0[0].fidelity = 0.25;
        let b = EdgeStates::uniform(&t.networks()[1], EdgeState::new(1.0, 1.0).unwrap());
        let demand = Demand::new(Endpoint { network: 0, node: 0 }, Endpoint { network: 0, node: 1 }).unwrap();
        let o = evaluate_demand(&t, &[a, b], &criteria(Mode::Threshold), &demand).unwrap();
        assert_eq!(o.fidelity, 0.25);
        assert!(!o.satisfied);
    }

    #[test]
    fn keyrate_inter_demand() {
        let line = SubNetworkGraph::new("l", 2, vec![(0, 1)], Some(0)).unwrap();
        let t = Topology::new(vec![line.clone(), line]).unwrap();
        let states: Vec<_> = t
            .networks()
            .iter()
            .map(|g| EdgeStates::uniform(g, EdgeState::new(0.98, 0.5).unwrap()))
            .collect();
        let demand = Demand::new(Endpoint { network: 0, node: 1 }, Endpoint { network: 1, node: 1 }).unwrap();
        let o = evaluate_demand(&t, &states, &criteria(Mode::Keyrate), &demand).unwrap();
        assert_eq!(
            o.path,
            vec![
                Endpoint { network: 0, node: 1 },
                Endpoint { network: 0, node: 0 },
                Endpoint { network: 1, node: 0 },
                Endpoint { network: 1, node: 1 },
            ]
        );
        assert!((o.fidelity - 0.960_533_333_333_333_3).abs() < 1e-12);
        assert!((o.probability - 0.25).abs() < 1e-15);
        let rate = o.key_rate.unwrap();
        assert!((rate - 1.300_709e5).abs() < 1e1, "{rate}");
        assert!(o.satisfied);
    }

    #[test]
    fn gateway_source_skips_the_near_segment() {
        let t = triangles();
        let demand = Demand::new(Endpoint { network: 0, node: 0 }, Endpoint { network: 1, node: 0 }).unwrap();
        let r = t.route(&demand).unwrap();
        assert_eq!(r.hop_count(), 1);
    }

    #[test]
    fn invalid_demands() {
        let e = Endpoint { network: 0, node: 1 };
        assert!(Demand::new(e, e).is_err());
        let t = triangles();
        let d = Demand::new(e, Endpoint { network: 2, node: 0 }).unwrap();
        assert!(t.route(&d).is_err());
        let states: Vec<EdgeStates> = vec![];
        assert!(p_sat(&t, &states, &criteria(Mode::Threshold), &[]).is_err());
    }
}
