//! Threshold constraints between pairs of sub-networks and the resource cost
//! of reaching a given average edge fidelity (purification) or edge
//! probability (multiplexing).
//!
//! Constraint values follow the `<= 0 means satisfied` convention.

use serde::{Deserialize, Serialize};

use crate::entanglement::{avg_path_fidelity, werner_weight};
use crate::error::{check_unit, Error, Result};
use crate::netmodel::SubNetworkProfile;

/// Task requirements: fidelity/probability thresholds and optionally a
/// secure-key-rate target with the pair repetition rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ThresholdRecord", into = "ThresholdRecord")]
pub struct TaskThresholds {
    fidelity: Option<f64>,
    probability: Option<f64>,
    key_rate: Option<KeyRateTarget>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyRateTarget {
    /// Required secure key rate, Hz.
    pub min_rate: f64,
    /// Entangled pair repetition rate, Hz.
    pub rep_rate: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    key_rate: Option<KeyRateTarget>,
}

impl TryFrom<ThresholdRecord> for TaskThresholds {
    type Error = Error;
    fn try_from(r: ThresholdRecord) -> Result<Self> {
        TaskThresholds::new(r.fidelity, r.probability, r.key_rate)
    }
}

impl From<TaskThresholds> for ThresholdRecord {
    fn from(t: TaskThresholds) -> Self {
        ThresholdRecord {
            fidelity: t.fidelity,
            probability: t.probability,
            key_rate: t.key_rate,
        }
    }
}

impl TaskThresholds {
    pub fn new(
        fidelity: Option<f64>,
        probability: Option<f64>,
        key_rate: Option<KeyRateTarget>,
    ) -> Result<Self> {
        if let Some(f) = fidelity {
            if !(f > 0.25 && f <= 1.0) {
                return Err(Error::OutOfRange {
                    name: "fidelity threshold",
                    value: f,
                    range: "(1/4, 1]",
                });
            }
        }
        if let Some(p) = probability {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::OutOfRange {
                    name: "probability threshold",
                    value: p,
                    range: "(0, 1]",
                });
            }
        }
        if let Some(k) = key_rate {
            if !(k.min_rate > 0.0 && k.min_rate.is_finite()) {
                return Err(Error::OutOfRange {
                    name: "key rate threshold",
                    value: k.min_rate,
                    range: "(0, inf)",
                });
            }
            if !(k.rep_rate > 0.0 && k.rep_rate.is_finite()) {
                return Err(Error::OutOfRange {
                    name: "repetition rate",
                    value: k.rep_rate,
                    range: "(0, inf)",
                });
            }
        }
        let pair = fidelity.is_some() && probability.is_some();
        if !pair && key_rate.is_none() {
            return Err(Error::Unsupported(
                "thresholds need fidelity and probability, or a key rate target".into(),
            ));
        }
        Ok(TaskThresholds {
            fidelity,
            probability,
            key_rate,
        })
    }

    /// Fidelity and probability thresholds.
    pub fn fidelity_probability(fidelity: f64, probability: f64) -> Result<Self> {
        Self::new(Some(fidelity), Some(probability), None)
    }

    pub fn fidelity(&self) -> Option<f64> {
        self.fidelity
    }

    pub fn probability(&self) -> Option<f64> {
        self.probability
    }

    pub fn key_rate(&self) -> Option<KeyRateTarget> {
        self.key_rate
    }

    pub fn require_fidelity(&self) -> Result<f64> {
        self.fidelity
            .ok_or_else(|| Error::Unsupported("a fidelity threshold is required".into()))
    }

    pub fn require_probability(&self) -> Result<f64> {
        self.probability
            .ok_or_else(|| Error::Unsupported("a probability threshold is required".into()))
    }
}

/// Constant folding the fidelity threshold and backbone fidelity into the
/// pairwise fidelity constraint.
pub fn effective_fidelity_target(threshold: f64, backbone_fidelity: f64) -> Result<f64> {
    if !(backbone_fidelity > 0.25) {
        return Err(Error::BackboneTooWeak(backbone_fidelity));
    }
    Ok((9.0 * threshold - backbone_fidelity - 2.0) / (4.0 * backbone_fidelity - 1.0))
}

/// Worst-case fidelity constraint between two sub-networks whose farthest
/// nodes sit `l1` and `l2` hops from their gateways. `<= 0` means the
/// threshold is met.
pub fn fidelity_constraint_g(
    mean_f1: f64,
    mean_f2: f64,
    l1: usize,
    l2: usize,
    threshold: f64,
    backbone_fidelity: f64,
) -> Result<f64> {
    let f_eff = effective_fidelity_target(threshold, backbone_fidelity)?;
    let a = avg_path_fidelity(mean_f1, l1)?;
    let b = avg_path_fidelity(mean_f2, l2)?;
    Ok(f_eff - (4.0 * a * b - a - b))
}

/// Same constraint in product form, `(1/4 + f_eff) - 9/4 * w1^l1 * w2^l2`
/// with Werner weights `w_i`. Algebraically identical to
/// [`fidelity_constraint_g`]; the optimizer works with this form.
pub fn fidelity_constraint_product(
    mean_f1: f64,
    mean_f2: f64,
    l1: usize,
    l2: usize,
    f_eff: f64,
) -> f64 {
    0.25 + f_eff - 2.25 * werner_weight(mean_f1).powi(l1 as i32) * werner_weight(mean_f2).powi(l2 as i32)
}

/// Probability constraint between two sub-networks. `<= 0` means met.
pub fn probability_constraint_h(
    mean_eta1: f64,
    mean_eta2: f64,
    l1: usize,
    l2: usize,
    threshold: f64,
    backbone_probability: f64,
) -> Result<f64> {
    check_unit("mean probability", mean_eta1)?;
    check_unit("mean probability", mean_eta2)?;
    check_unit("backbone probability", backbone_probability)?;
    Ok(threshold - mean_eta1.powi(l1 as i32) * backbone_probability * mean_eta2.powi(l2 as i32))
}

/// Purification cost `|E| / sqrt(1 - F)`.
pub fn purification_cost(edge_count: usize, mean_fidelity: f64) -> Result<f64> {
    purification_cost_real(edge_count as f64, mean_fidelity)
}

pub(crate) fn purification_cost_real(edges: f64, mean_fidelity: f64) -> Result<f64> {
    check_unit("mean fidelity", mean_fidelity)?;
    if mean_fidelity == 1.0 {
        return Err(Error::SaturatedFidelity);
    }
    Ok(edges / (1.0 - mean_fidelity).sqrt())
}

/// Multiplexing cost `C |E| n` with `n = ln(1 - eta) / ln(1 - eta_bare)`
/// attempts per edge and per-edge constant `C = 1`.
pub fn multiplexing_cost(edge_count: usize, mean_eta: f64, eta_bare: f64) -> Result<f64> {
    multiplexing_cost_scaled(edge_count, mean_eta, eta_bare, 1.0)
}

/// [`multiplexing_cost`] with an explicit per-edge constant.
pub fn multiplexing_cost_scaled(
    edge_count: usize,
    mean_eta: f64,
    eta_bare: f64,
    per_edge: f64,
) -> Result<f64> {
    Ok(per_edge * edge_count as f64 * attempts_per_edge(mean_eta, eta_bare)?)
}

/// Real-valued attempt count `n` that multiplexes `eta_bare` up to `mean_eta`.
pub fn attempts_per_edge(mean_eta: f64, eta_bare: f64) -> Result<f64> {
    if !(eta_bare > 0.0 && eta_bare < 1.0) {
        return Err(Error::DegenerateBareProbability(eta_bare));
    }
    check_unit("mean probability", mean_eta)?;
    if mean_eta == 1.0 {
        return Err(Error::SaturatedProbability);
    }
    if mean_eta < eta_bare {
        return Err(Error::TargetBelowBare {
            target: mean_eta,
            bare: eta_bare,
        });
    }
    Ok((-mean_eta).ln_1p() / (-eta_bare).ln_1p())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCost {
    pub fidelity_cost: f64,
    pub probability_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalCost {
    pub total_fidelity_cost: f64,
    pub total_probability_cost: f64,
    pub per_network: Vec<NetworkCost>,
}

/// Sums purification and multiplexing costs over all sub-networks.
pub fn global_cost(
    profiles: &[SubNetworkProfile],
    mean_fidelities: &[f64],
    mean_etas: &[f64],
) -> Result<GlobalCost> {
    if profiles.len() != mean_fidelities.len() || profiles.len() != mean_etas.len() {
        return Err(Error::Unsupported(format!(
            "{} profiles but {} fidelities and {} probabilities",
            profiles.len(),
            mean_fidelities.len(),
            mean_etas.len()
        )));
    }
    let per_network = profiles
        .iter()
        .zip(mean_fidelities.iter().zip(mean_etas))
        .map(|(p, (&f, &eta))| {
            Ok(NetworkCost {
                fidelity_cost: purification_cost(p.edge_count(), f)?,
                probability_cost: multiplexing_cost(p.edge_count(), eta, p.eta_bare())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GlobalCost {
        total_fidelity_cost: per_network.iter().map(|c| c.fidelity_cost).sum(),
        total_probability_cost: per_network.iter().map(|c| c.probability_cost).sum(),
        per_network,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::Backbone;

    const EPS: f64 = 1e-12;

    #[test]
    fn effective_target_examples() {
        assert!((effective_fidelity_target(0.9, 1.0).unwrap() - 1.7).abs() < EPS);
        assert!(effective_fidelity_target(1.0 / 3.0, 1.0).unwrap().abs() < EPS);
        assert!((effective_fidelity_target(0.9, 0.95).unwrap() - 1.839_285_714_285_714).abs() < EPS);
        assert_eq!(effective_fidelity_target(0.9, 0.25), Err(Error::BackboneTooWeak(0.25)));
    }

    #[test]
    fn fidelity_constraint_examples() {
        for l in 1..4 {
            assert!((fidelity_constraint_g(1.0, 1.0, l, l + 1, 0.9, 1.0).unwrap() + 0.3).abs() < EPS);
        }
        // F_l = 0.9605333.., 4F^2 - 2F = 1.7694304711..
        let g = fidelity_constraint_g(0.98, 0.98, 2, 2, 0.9, 1.0).unwrap();
        assert!((g + 0.069_430_471_111_110_45).abs() < 1e-11, "g = {g}");
        // boundary: pick F_Th so that the end-to-end fidelity exactly meets it
        let bb = Backbone::new(0.97, 1.0).unwrap();
        let fl = avg_path_fidelity(0.96, 2).unwrap();
        let e2e = crate::entanglement::end_to_end_params(fl, fl, &bb, 1.0, 1.0).unwrap();
        let g = fidelity_constraint_g(0.96, 0.96, 2, 2, e2e.fidelity, 0.97).unwrap();
        assert!(g.abs() < EPS);
    }

    #[test]
    fn probability_constraint_examples() {
        assert!((probability_constraint_h(1.0, 1.0, 3, 2, 0.2, 1.0).unwrap() + 0.8).abs() < EPS);
        assert!((probability_constraint_h(0.5, 0.5, 2, 2, 0.016, 1.0).unwrap() + 0.0465).abs() < EPS);
        let t = 0.7f64.powi(4) * 0.9;
        assert!(probability_constraint_h(0.7, 0.7, 2, 2, t, 0.9).unwrap().abs() < EPS);
    }

    #[test]
    fn purification_cost_examples() {
        assert_eq!(purification_cost(37, 0.0).unwrap(), 37.0);
        assert!((purification_cost(1000, 0.75).unwrap() - 2000.0).abs() < 1e-9);
        assert!((purification_cost(1000, 0.99).unwrap() - 10_000.0).abs() < 1e-8);
        assert_eq!(purification_cost(10, 1.0), Err(Error::SaturatedFidelity));
    }

    #[test]
    fn multiplexing_cost_examples() {
        assert!((multiplexing_cost(40, 0.3, 0.3).unwrap() - 40.0).abs() < EPS);
        assert!((multiplexing_cost(100, 0.19, 0.1).unwrap() - 200.0).abs() < 1e-9);
        let eta10 = crate::entanglement::multiplexed_probability(0.1, 10.0).unwrap();
        assert!((multiplexing_cost(100, eta10, 0.1).unwrap() - 1000.0).abs() < 1e-9);
        assert!(matches!(multiplexing_cost(100, 0.05, 0.1), Err(Error::TargetBelowBare { .. })));
        assert_eq!(multiplexing_cost(100, 1.0, 0.1), Err(Error::SaturatedProbability));
        assert!((multiplexing_cost_scaled(100, 0.19, 0.1, 2.5).unwrap() - 500.0).abs() < 1e-9);
    }

    #[test]
    fn global_cost_is_extensive() {
        let a = SubNetworkProfile::new(1000, 3, 0.1).unwrap();
        let b = SubNetworkProfile::new(200, 2, 0.1).unwrap();
        let single = global_cost(&[a], &[0.75], &[0.5]).unwrap();
        assert_eq!(single.total_fidelity_cost, purification_cost(1000, 0.75).unwrap());
        assert_eq!(single.total_probability_cost, multiplexing_cost(1000, 0.5, 0.1).unwrap());
        let twice = global_cost(&[a, a], &[0.75, 0.75], &[0.5, 0.5]).unwrap();
        assert_eq!(twice.total_fidelity_cost, 2.0 * single.total_fidelity_cost);
        assert_eq!(twice.total_probability_cost, 2.0 * single.total_probability_cost);
        let mixed = global_cost(&[a, b], &[0.75, 0.96], &[0.5, 0.5]).unwrap();
        assert!((mixed.total_fidelity_cost - 3000.0).abs() < 1e-9);
        assert!(global_cost(&[a, b], &[0.75], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn thresholds_validation() {
        assert!(TaskThresholds::fidelity_probability(0.9, 0.016).is_ok());
        assert!(TaskThresholds::new(Some(0.9), None, None).is_err());
        assert!(TaskThresholds::new(None, None, Some(KeyRateTarget { min_rate: 1e3, rep_rate: 1e6 })).is_ok());
        assert!(TaskThresholds::fidelity_probability(0.2, 0.1).is_err());
        assert!(TaskThresholds::fidelity_probability(0.9, 0.0).is_err());
        let json = r#"{"fidelity":0.9,"probability":0.016,"extra":1}"#;
        assert!(serde_json::from_str::<TaskThresholds>(json).is_err());
    }
}
