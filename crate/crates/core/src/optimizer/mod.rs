//! Cost-minimal average edge parameters under pairwise threshold constraints.
//!
//! Fidelity and probability are optimised independently. Each problem is
//!
//! ```text
//! minimise  sum_i C_i(v_i)   subject to  c_ij(v_i, v_j) <= 0  for all i < j
//! ```
//!
//! with strictly increasing costs, so at least one constraint is active at
//! the optimum. Two networks are solved by nested 1-D root finding on the
//! stationarity ratio and the active constraint ([`solve_fidelity_two`],
//! [`solve_probability_two`]); any number up to [`MAX_NETWORKS`] by active-set
//! enumeration with a damped Newton solve per candidate
//! ([`solve_fidelity_n`], [`solve_probability_n`]). Every returned point is
//! checked against the full KKT conditions in natural coordinates.
//! [`grid_oracle`] is an independent brute-force reference for small cases.

mod active_set;
mod grid;
mod model;
mod roots;
mod two;

use serde::{Deserialize, Serialize};

use crate::costs::{effective_fidelity_target, TaskThresholds};
use crate::error::{Error, Result};
use crate::netmodel::{Backbone, SubNetworkProfile};

pub use active_set::{solve_fidelity_n, solve_probability_n};
pub use grid::{grid_oracle, GridSolution};
pub use roots::{bisect, brent};
pub use two::{solve_fidelity_two, solve_probability_two};

pub(crate) use model::PairModel;

/// Upper bound on the network count for active-set enumeration.
pub const MAX_NETWORKS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Fidelity,
    Probability,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Residual tolerance for the two-network root solves.
    pub root_tolerance: f64,
    /// Tolerance for KKT acceptance (stationarity, complementarity,
    /// feasibility, active constraint).
    pub kkt_tolerance: f64,
    pub max_iterations: usize,
    /// Raise optimal probabilities that fall below a network's bare
    /// probability up to it instead of only flagging them.
    pub clamp_to_bare: bool,
    /// Per-edge multiplexing cost constant.
    pub multiplexing_constant: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            root_tolerance: 1e-10,
            kkt_tolerance: 1e-8,
            max_iterations: 200,
            clamp_to_bare: false,
            multiplexing_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationProblem {
    pub profiles: Vec<SubNetworkProfile>,
    pub backbone: Backbone,
    pub thresholds: TaskThresholds,
    pub settings: SolverSettings,
}

impl OptimizationProblem {
    pub fn new(profiles: Vec<SubNetworkProfile>, backbone: Backbone, thresholds: TaskThresholds) -> Result<Self> {
        if profiles.len() < 2 {
            return Err(Error::Unsupported(format!(
                "need at least two sub-networks, got {}",
                profiles.len()
            )));
        }
        Ok(OptimizationProblem {
            profiles,
            backbone,
            thresholds,
            settings: SolverSettings::default(),
        })
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    pub(crate) fn model(&self, parameter: Parameter) -> Result<PairModel> {
        match parameter {
            Parameter::Fidelity => PairModel::fidelity(
                &self.profiles,
                self.thresholds.require_fidelity()?,
                self.backbone.fidelity(),
            ),
            Parameter::Probability => PairModel::probability(
                &self.profiles,
                self.thresholds.require_probability()?,
                self.backbone.probability(),
                self.settings.multiplexing_constant,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// `min(2 - f_eff, eta* - eta_Th)`; must be positive.
    pub margin: f64,
    pub fidelity_margin: f64,
    pub probability_margin: f64,
}

/// Evaluates both constraints in the limit of perfect sub-networks
/// (`F -> 1`, `eta -> 1`). Reaching a threshold only in that limit is
/// infeasible, since the limit lies outside the open domain.
pub fn feasibility_check(problem: &OptimizationProblem) -> Result<Feasibility> {
    let f_eff = effective_fidelity_target(
        problem.thresholds.require_fidelity()?,
        problem.backbone.fidelity(),
    )?;
    let fidelity_margin = 2.0 - f_eff;
    let probability_margin = problem.backbone.probability() - problem.thresholds.require_probability()?;
    let margin = fidelity_margin.min(probability_margin);
    Ok(Feasibility {
        feasible: margin > 0.0,
        margin,
        fidelity_margin,
        probability_margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Max over networks of `|dC_i + sum_j lambda_ij dc_ij/dv_i|`, relative
    /// to `max(1, |dC_i|)`.
    pub stationarity: f64,
    /// Largest constraint violation, `max(0, c_ij)`.
    pub feasibility: f64,
    /// Max `|lambda_ij c_ij|`.
    pub complementarity: f64,
    /// Most negative multiplier (0 if all nonnegative).
    pub dual: f64,
    /// `min |c_ij|` over pairs: distance of the closest constraint from
    /// being active.
    pub active_gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.feasibility)
            .max(self.complementarity)
            .max(self.dual)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionStatus {
    Optimal,
    /// Some optimal probability lies below that network's bare probability
    /// (fewer than one attempt per edge).
    BelowBare,
    /// Such probabilities were raised to the bare probability.
    ClampedToBare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktSolution {
    pub parameter: Parameter,
    pub values: Vec<f64>,
    /// One entry per pair `i < j`, zero for inactive pairs.
    pub multipliers: Vec<Multiplier>,
    pub active_set: Vec<(usize, usize)>,
    pub total_cost: f64,
    pub costs: Vec<f64>,
    pub residuals: Residuals,
    pub status: SolutionStatus,
}

impl KktSolution {
    pub fn multiplier(&self, i: usize, j: usize) -> Option<f64> {
        let (i, j) = (i.min(j), i.max(j));
        self.multipliers.iter().find(|m| m.i == i && m.j == j).map(|m| m.value)
    }
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

pub(crate) fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    pairs(n).collect()
}

/// KKT residuals of `values` with multipliers given per pair in
/// [`all_pairs`] order.
pub(crate) fn kkt_residuals(model: &PairModel, values: &[f64], lambdas: &[f64]) -> Residuals {
    let n = model.len();
    let mut grad: Vec<f64> = (0..n).map(|i| model.cost_grad(i, values[i])).collect();
    let scale: Vec<f64> = grad.iter().map(|g| g.abs().max(1.0)).collect();
    let mut feasibility = 0.0f64;
    let mut complementarity = 0.0f64;
    let mut dual = 0.0f64;
    let mut active_gap = f64::INFINITY;
    for (k, (i, j)) in pairs(n).enumerate() {
        let c = model.constraint(i, j, values[i], values[j]);
        let (gi, gj) = model.constraint_grad(i, j, values[i], values[j]);
        grad[i] += lambdas[k] * gi;
        grad[j] += lambdas[k] * gj;
        feasibility = feasibility.max(c);
        complementarity = complementarity.max((lambdas[k] * c).abs());
        dual = dual.max(-lambdas[k]);
        active_gap = active_gap.min(c.abs());
    }
    let stationarity = grad
        .iter()
        .zip(&scale)
        .map(|(g, s)| g.abs() / s)
        .fold(0.0, f64::max);
    Residuals {
        stationarity,
        feasibility,
        complementarity,
        dual,
        active_gap,
    }
}

/// Multipliers of the natural-coordinate constraints from stationarity of
/// the first network in each active pair.
pub(crate) fn assemble_solution(
    model: &PairModel,
    values: Vec<f64>,
    lambdas: Vec<f64>,
    settings: &SolverSettings,
    profiles: &[SubNetworkProfile],
) -> Result<KktSolution> {
    let n = model.len();
    let residuals = kkt_residuals(model, &values, &lambdas);
    let tol = settings.kkt_tolerance;
    let multipliers: Vec<Multiplier> = pairs(n)
        .zip(&lambdas)
        .map(|((i, j), &value)| Multiplier { i, j, value })
        .collect();
    let active_set = pairs(n)
        .filter(|&(i, j)| model.constraint(i, j, values[i], values[j]).abs() <= tol)
        .collect();
    if residuals.max() > tol || residuals.active_gap > tol {
        return Err(Error::NoKktPoint {
            best_residual: residuals.max().max(residuals.active_gap),
        });
    }

    let mut status = SolutionStatus::Optimal;
    let mut values = values;
    if model.parameter == Parameter::Probability {
        let below: Vec<usize> = (0..n).filter(|&i| values[i] < profiles[i].eta_bare()).collect();
        if !below.is_empty() {
            if settings.clamp_to_bare {
                for i in below {
                    values[i] = profiles[i].eta_bare();
                }
                status = SolutionStatus::ClampedToBare;
            } else {
                status = SolutionStatus::BelowBare;
            }
        }
    }
    let costs: Vec<f64> = (0..n).map(|i| model.cost(i, values[i])).collect();
    Ok(KktSolution {
        parameter: model.parameter,
        total_cost: costs.iter().sum(),
        costs,
        values,
        multipliers,
        active_set,
        residuals,
        status,
    })
}

fn ensure_feasible(problem: &OptimizationProblem, parameter: Parameter) -> Result<()> {
    let f = feasibility_check(problem)?;
    match parameter {
        Parameter::Fidelity if f.fidelity_margin <= 0.0 => Err(Error::Infeasible(format!(
            "backbone fidelity {} cannot support fidelity threshold {}",
            problem.backbone.fidelity(),
            problem.thresholds.require_fidelity()?
        ))),
        Parameter::Probability if f.probability_margin <= 0.0 => Err(Error::Infeasible(
            "backbone probability below threshold".into(),
        )),
        _ => Ok(()),
    }
}

/// Two networks: nested root finding; more: active-set enumeration.
pub fn solve(problem: &OptimizationProblem, parameter: Parameter) -> Result<KktSolution> {
    match (problem.profiles.len(), parameter) {
        (2, Parameter::Fidelity) => solve_fidelity_two(problem),
        (2, Parameter::Probability) => solve_probability_two(problem),
        (_, Parameter::Fidelity) => solve_fidelity_n(problem),
        (_, Parameter::Probability) => solve_probability_n(problem),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(f_th: f64, f_star: f64, eta_th: f64, eta_star: f64) -> OptimizationProblem {
        let p = SubNetworkProfile::new(100, 2, 0.1).unwrap();
        OptimizationProblem::new(
            vec![p, p],
            Backbone::new(f_star, eta_star).unwrap(),
            TaskThresholds::fidelity_probability(f_th, eta_th).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn feasibility_examples() {
        let f = feasibility_check(&problem(0.9, 1.0, 0.016, 1.0)).unwrap();
        assert!(f.feasible);
        assert!((f.fidelity_margin - 0.3).abs() < 1e-12);

        let f = feasibility_check(&problem(0.9, 1.0, 0.5, 0.4)).unwrap();
        assert!(!f.feasible);
        assert!(f.probability_margin < 0.0);

        // f_eff = 2 exactly: only the excluded corner F = 1 works
        let f = feasibility_check(&problem(1.0, 1.0, 0.016, 1.0)).unwrap();
        assert!(!f.feasible);
        assert_eq!(f.fidelity_margin, 0.0);
    }

    #[test]
    fn problem_needs_two_networks() {
        let p = SubNetworkProfile::new(100, 2, 0.1).unwrap();
        assert!(OptimizationProblem::new(
            vec![p],
            Backbone::new(1.0, 1.0).unwrap(),
            TaskThresholds::fidelity_probability(0.9, 0.1).unwrap()
        )
        .is_err());
    }
}
