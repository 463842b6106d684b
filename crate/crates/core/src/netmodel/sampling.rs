use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SubNetworkGraph;
use crate::error::{check_unit, Error, Result};
use crate::seeds::{rng_from_seed, Rng};

/// Rejection attempts per draw before a truncated normal is declared
/// degenerate.
const MAX_TRUNCATION_ATTEMPTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    Homogeneous,
    TruncatedNormal,
}

/// Distribution of a per-edge parameter (fidelity or probability).
///
/// For the truncated normal, `mean` and `std` parameterise the parent normal
/// before truncation to `support`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRecord", into = "DistributionRecord")]
pub struct ParameterDistribution {
    kind: DistributionKind,
    mean: f64,
    std: f64,
    support: (f64, f64),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionRecord {
    kind: DistributionKind,
    mean: f64,
    #[serde(default)]
    std: f64,
    #[serde(default = "unit_support")]
    support: [f64; 2],
}

fn unit_support() -> [f64; 2] {
    [0.0, 1.0]
}

impl TryFrom<DistributionRecord> for ParameterDistribution {
    type Error = Error;
    fn try_from(r: DistributionRecord) -> Result<Self> {
        ParameterDistribution::new(r.kind, r.mean, r.std, (r.support[0], r.support[1]))
    }
}

impl From<ParameterDistribution> for DistributionRecord {
    fn from(d: ParameterDistribution) -> Self {
        DistributionRecord {
            kind: d.kind,
            mean: d.mean,
            std: d.std,
            support: [d.support.0, d.support.1],
        }
    }
}

impl ParameterDistribution {
    pub fn new(kind: DistributionKind, mean: f64, std: f64, support: (f64, f64)) -> Result<Self> {
        let (lo, hi) = support;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::DegenerateDistribution(format!(
                "support [{lo}, {hi}] is not an interval"
            )));
        }
        if !(lo..=hi).contains(&mean) {
            return Err(Error::OutOfRange {
                name: "distribution mean",
                value: mean,
                range: "support",
            });
        }
        if !(std >= 0.0) || !std.is_finite() {
            return Err(Error::OutOfRange {
                name: "distribution std",
                value: std,
                range: ">= 0",
            });
        }
        if kind == DistributionKind::Homogeneous && std != 0.0 {
            return Err(Error::DegenerateDistribution(
                "homogeneous distribution requires std = 0".into(),
            ));
        }
        if std > 0.0 && lo == hi {
            return Err(Error::DegenerateDistribution(format!(
                "std {std} with zero-width support has no truncation mass"
            )));
        }
        Ok(ParameterDistribution {
            kind,
            mean,
            std,
            support,
        })
    }

    /// Every edge gets exactly `mean`.
    pub fn homogeneous(mean: f64) -> Result<Self> {
        Self::new(DistributionKind::Homogeneous, mean, 0.0, (0.0, 1.0))
    }

    /// Normal(mean, std) truncated to [0, 1].
    pub fn truncated_normal(mean: f64, std: f64) -> Result<Self> {
        Self::new(DistributionKind::TruncatedNormal, mean, std, (0.0, 1.0))
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Same shape, different location.
    pub fn with_mean(&self, mean: f64) -> Result<Self> {
        Self::new(self.kind, mean, self.std, self.support)
    }

    pub(crate) fn check_unit_support(&self, name: &'static str) -> Result<()> {
        check_unit(name, self.support.0)?;
        check_unit(name, self.support.1)?;
        Ok(())
    }

    pub fn sample(&self, rng: &mut Rng) -> Result<f64> {
        if self.std == 0.0 {
            return Ok(self.mean);
        }
        let normal = Normal::new(self.mean, self.std)
            .map_err(|e| Error::DegenerateDistribution(e.to_string()))?;
        let (lo, hi) = self.support;
        for _ in 0..MAX_TRUNCATION_ATTEMPTS {
            let x = normal.sample(rng);
            if (lo..=hi).contains(&x) {
                return Ok(x);
            }
        }
        Err(Error::DegenerateDistribution(format!(
            "no draw landed in [{lo}, {hi}] after {MAX_TRUNCATION_ATTEMPTS} attempts"
        )))
    }
}

/// Fidelity and heralded success probability of one edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeState {
    pub fidelity: f64,
    pub probability: f64,
}

impl EdgeState {
    pub fn new(fidelity: f64, probability: f64) -> Result<Self> {
        Ok(EdgeState {
            fidelity: check_unit("edge fidelity", fidelity)?,
            probability: check_unit("edge probability", probability)?,
        })
    }
}

/// Edge states aligned with [`SubNetworkGraph::edges`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStates(pub Vec<EdgeState>);

impl EdgeStates {
    pub fn uniform(graph: &SubNetworkGraph, state: EdgeState) -> Self {
        EdgeStates(vec![state; graph.edge_count()])
    }

    pub fn get(&self, graph: &SubNetworkGraph, u: usize, v: usize) -> Option<EdgeState> {
        graph.edge_index(u, v).map(|i| self.0[i])
    }

    pub fn as_slice(&self) -> &[EdgeState] {
        &self.0
    }
}

/// Draws i.i.d. edge states in sorted edge order; for each edge the fidelity
/// is drawn before the probability.
pub fn sample_edge_states(
    graph: &SubNetworkGraph,
    fidelity: &ParameterDistribution,
    probability: &ParameterDistribution,
    seed: u64,
) -> Result<EdgeStates> {
    fidelity.check_unit_support("fidelity support")?;
    probability.check_unit_support("probability support")?;
    let mut rng = rng_from_seed(seed);
    let states = (0..graph.edge_count())
        .map(|_| {
            let f = fidelity.sample(&mut rng)?;
            let p = probability.sample(&mut rng)?;
            EdgeState::new(f, p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgeStates(states))
}
