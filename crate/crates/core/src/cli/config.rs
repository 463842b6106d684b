//! Run configuration file (JSON). Unknown keys are rejected at every level.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::costs::TaskThresholds;
use crate::error::{Error, Result};
use crate::netmodel::{
    generate_random_subnetwork, Backbone, EdgeState, ParameterDistribution, SubNetworkGraph,
    SubNetworkProfile,
};
use crate::optimizer::SolverSettings;
use crate::satsim::{Criteria, Endpoint, Mode, SweepSpec};

/// One sub-network: a random graph, an explicit graph, or bare aggregate
/// parameters (usable by `optimize` only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NetworkSpec {
    Generated {
        nodes: usize,
        edges: usize,
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta_bare: Option<f64>,
    },
    Inline {
        graph: SubNetworkGraph,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta_bare: Option<f64>,
    },
    Profile {
        edge_count: usize,
        l_max: usize,
        eta_bare: f64,
    },
}

/// A network resolved from its spec.
#[derive(Debug, Clone)]
pub struct ResolvedNetwork {
    pub graph: Option<SubNetworkGraph>,
    pub profile: Option<SubNetworkProfile>,
}

impl NetworkSpec {
    fn eta_bare(&self) -> Option<f64> {
        match self {
            NetworkSpec::Generated { eta_bare, .. } | NetworkSpec::Inline { eta_bare, .. } => *eta_bare,
            NetworkSpec::Profile { eta_bare, .. } => Some(*eta_bare),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            NetworkSpec::Generated { nodes, edges, .. } => {
                let max = nodes * nodes.saturating_sub(1) / 2;
                if *nodes == 0 || *edges + 1 < *nodes || *edges > max {
                    return Err(Error::InfeasibleGraph {
                        nodes: *nodes,
                        edges: *edges,
                    });
                }
            }
            NetworkSpec::Inline { .. } => {}
            NetworkSpec::Profile {
                edge_count,
                l_max,
                eta_bare,
            } => {
                SubNetworkProfile::new(*edge_count, *l_max, *eta_bare)?;
            }
        }
        if let Some(b) = self.eta_bare() {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::DegenerateBareProbability(b));
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<ResolvedNetwork> {
        let graph = match self {
            NetworkSpec::Generated {
                nodes, edges, seed, ..
            } => Some(generate_random_subnetwork(*nodes, *edges, *seed)?),
            NetworkSpec::Inline { graph, .. } => Some(graph.clone()),
            NetworkSpec::Profile { .. } => None,
        };
        let profile = match (self, &graph, self.eta_bare()) {
            (
                NetworkSpec::Profile {
                    edge_count,
                    l_max,
                    eta_bare,
                },
                _,
                _,
            ) => Some(SubNetworkProfile::new(*edge_count, *l_max, *eta_bare)?),
            (_, Some(g), Some(b)) => Some(g.profile(b)?),
            _ => None,
        };
        Ok(ResolvedNetwork { graph, profile })
    }
}

/// Explicit source/destination pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSpec {
    pub source: Endpoint,
    pub destination: Endpoint,
}

/// Single-configuration simulation. Edge states are sampled from the two
/// distributions unless given explicitly (one list per network, in sorted
/// edge order); demands are random unless listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<ParameterDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<ParameterDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_states: Option<Vec<Vec<EdgeState>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand_count: Option<usize>,
    #[serde(default)]
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demands: Option<Vec<DemandSpec>>,
}

impl SimulateSpec {
    fn validate(&self) -> Result<()> {
        match (&self.edge_states, &self.fidelity, &self.probability) {
            (Some(states), _, _) => {
                for s in states.iter().flatten() {
                    EdgeState::new(s.fidelity, s.probability)?;
                }
            }
            (None, Some(_), Some(_)) => {}
            _ => {
                return Err(Error::Unsupported(
                    "simulate needs edge_states or both fidelity and probability distributions".into(),
                ))
            }
        }
        match (&self.demands, self.demand_count) {
            (Some(d), _) if d.is_empty() => Err(Error::Empty("demand list")),
            (Some(_), _) => Ok(()),
            (None, Some(n)) if n > 0 => {
                if (0.0..=1.0).contains(&self.ratio) {
                    Ok(())
                } else {
                    Err(Error::OutOfRange {
                        name: "demand ratio",
                        value: self.ratio,
                        range: "[0, 1]",
                    })
                }
            }
            _ => Err(Error::Unsupported(
                "simulate needs demands or a positive demand_count".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub networks: Vec<NetworkSpec>,
    pub backbone: Backbone,
    pub thresholds: TaskThresholds,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub optimizer: SolverSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSpec>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Unsupported(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every nested invariant that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        if self.networks.is_empty() {
            return Err(Error::Empty("network list"));
        }
        for n in &self.networks {
            n.validate()?;
        }
        let s = &self.optimizer;
        if !(s.root_tolerance > 0.0 && s.kkt_tolerance > 0.0 && s.max_iterations > 0) {
            return Err(Error::Unsupported(
                "optimizer tolerances and max_iterations must be positive".into(),
            ));
        }
        if !(s.multiplexing_constant > 0.0 && s.multiplexing_constant.is_finite()) {
            return Err(Error::OutOfRange {
                name: "multiplexing constant",
                value: s.multiplexing_constant,
                range: "(0, inf)",
            });
        }
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        if let Some(sim) = &self.simulate {
            sim.validate()?;
        }
        if self.sweep.is_some() || self.simulate.is_some() {
            self.criteria()?;
        }
        Ok(())
    }

    pub fn criteria(&self) -> Result<Criteria> {
        Criteria::new(self.backbone, self.thresholds, self.mode)
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(canonical.as_bytes()))
    }

    /// Fidelity inputs below 1/4, where the swap formula leaves the
    /// physical range.
    pub fn low_fidelity_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |what: &str, f: f64| {
            if f < 0.25 {
                out.push(format!("warning: {what} {f} is below 1/4"));
            }
        };
        if let Some(sweep) = &self.sweep {
            for &f in &sweep.fidelity_grid {
                check("sweep fidelity", f);
            }
        }
        if let Some(sim) = &self.simulate {
            if let Some(d) = &sim.fidelity {
                check("simulate fidelity mean", d.mean());
            }
            for s in sim.edge_states.iter().flatten().flatten() {
                check("edge fidelity", s.fidelity);
            }
        }
        out
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "networks": [
            {"kind": "generated", "nodes": 8, "edges": 12, "seed": 1, "eta_bare": 0.1},
            {"kind": "inline", "graph": {"id": "t", "node_count": 3, "edges": [[0,1],[1,2],[0,2]]}},
            {"kind": "profile", "edge_count": 100, "l_max": 2, "eta_bare": 0.2}
        ],
        "backbone": {"fidelity": 0.99, "probability": 0.9},
        "thresholds": {"fidelity": 0.9, "probability": 0.016},
        "sweep": {
            "fidelity_grid": [0.9, 1.0],
            "ratios": [0.1],
            "fidelity": {"kind": "homogeneous", "mean": 1.0},
            "probability": {"kind": "homogeneous", "mean": 0.9},
            "demand_count": 10
        },
        "master_seed": 5
    }"#;

    #[test]
    fn round_trip_is_identity() {
        let a = RunConfig::from_json(SAMPLE).unwrap();
        let b = RunConfig::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        assert_eq!(a.sweep.as_ref().unwrap().config_samples, 20);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = SAMPLE.replacen("\"master_seed\"", "\"seed\": 1, \"master_seed\"", 1);
        assert!(RunConfig::from_json(&bad).is_err());
        let bad = SAMPLE.replacen("\"eta_bare\": 0.1", "\"eta_bare\": 0.1, \"gw\": 1", 1);
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn nested_invariants_are_checked() {
        let bad = SAMPLE.replacen("\"nodes\": 8, \"edges\": 12", "\"nodes\": 3, \"edges\": 1", 1);
        assert!(RunConfig::from_json(&bad).is_err());
        let bad = SAMPLE.replacen("\"probability\": 0.9}", "\"probability\": 1.5}", 1);
        assert!(RunConfig::from_json(&bad).is_err());
        let bad = SAMPLE.replacen("\"ratios\": [0.1]", "\"ratios\": [1.1]", 1);
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn resolves_profiles() {
        let cfg = RunConfig::from_json(SAMPLE).unwrap();
        let r: Vec<_> = cfg.networks.iter().map(|n| n.resolve().unwrap()).collect();
        assert!(r[0].graph.is_some() && r[0].profile.is_some());
        assert!(r[1].graph.is_some() && r[1].profile.is_none());
        assert_eq!(r[2].profile.unwrap().l_max(), 2);
    }
}
