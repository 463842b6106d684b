//! Two sub-networks: the stationarity conditions reduce to a ratio equation
//! between the networks plus the active constraint.
//!
//! Fidelity:
//! `|E1| (4F1 - 1) / (l1 (1 - F1)^{3/2}) = |E2| (4F2 - 1) / (l2 (1 - F2)^{3/2})`
//! and `9/4 w1^l1 w2^l2 = 1/4 + f_eff`.
//!
//! Probability:
//! `|E1| eta1 / (l1 (1 - eta1) L1) = |E2| eta2 / (l2 (1 - eta2) L2)` with
//! `L_i = |ln(1 - eta_bare_i)|` (the `L_i` cancel when the bare probabilities
//! agree), and `eta1^l1 eta* eta2^l2 = eta_Th`.
//!
//! Each side of the ratio equation increases strictly from 0 to infinity
//! over the domain, so the partner value is a well-defined increasing
//! function of the first network's value; bisection finds it. The active
//! constraint is then monotone in the first value and is solved by Brent.

use super::roots::{bisect, brent};
use super::{assemble_solution, ensure_feasible, KktSolution, OptimizationProblem, PairModel, Parameter};
use crate::error::{Error, Result};

fn fidelity_ratio(edges: f64, hops: f64, f: f64) -> f64 {
    edges * (4.0 * f - 1.0) / (hops * (1.0 - f).powf(1.5))
}

fn probability_ratio(edges: f64, hops: f64, eta: f64, log_bare: f64) -> f64 {
    edges * eta / (hops * (1.0 - eta) * log_bare)
}

fn require_two(problem: &OptimizationProblem) -> Result<()> {
    if problem.profiles.len() == 2 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "the two-network solver got {} networks",
            problem.profiles.len()
        )))
    }
}

/// Optimal average edge fidelities for exactly two sub-networks.
pub fn solve_fidelity_two(problem: &OptimizationProblem) -> Result<KktSolution> {
    require_two(problem)?;
    ensure_feasible(problem, Parameter::Fidelity)?;
    let model = problem.model(Parameter::Fidelity)?;
    let p = &problem.profiles;
    let ratio = |i: usize, f: f64| fidelity_ratio(p[i].edge_count() as f64, p[i].l_max() as f64, f);
    solve_nested(problem, &model, ratio)
}

/// Optimal average edge probabilities for exactly two sub-networks.
pub fn solve_probability_two(problem: &OptimizationProblem) -> Result<KktSolution> {
    require_two(problem)?;
    ensure_feasible(problem, Parameter::Probability)?;
    let model = problem.model(Parameter::Probability)?;
    let p = &problem.profiles;
    let ratio = |i: usize, eta: f64| {
        let log_bare = -(-p[i].eta_bare()).ln_1p();
        probability_ratio(p[i].edge_count() as f64, p[i].l_max() as f64, eta, log_bare)
    };
    solve_nested(problem, &model, ratio)
}

fn solve_nested<R>(problem: &OptimizationProblem, model: &PairModel, ratio: R) -> Result<KktSolution>
where
    R: Fn(usize, f64) -> f64,
{
    let settings = &problem.settings;
    let (lo, hi) = model.domain();
    let (offset, scale) = model.offset_scale();
    // also rejects constraints that can never bind
    model.log_bound()?;

    let partner = |v1: f64| -> Result<f64> {
        let target = ratio(0, v1).ln();
        bisect(|v2| ratio(1, v2).ln() - target, lo, hi, settings.max_iterations)
    };
    // -c(v1, v2(v1)): increasing, -offset at lo and scale - offset at hi
    let active = |v1: f64| -> f64 {
        if v1 <= lo {
            return -offset;
        }
        if v1 >= hi {
            return scale - offset;
        }
        match partner(v1) {
            Ok(v2) => -model.constraint(0, 1, v1, v2),
            Err(_) => f64::NAN,
        }
    };
    let v1 = brent(active, lo, hi, 0.0, 0.0, settings.max_iterations)?;
    let v2 = partner(v1)?;
    if !(v1 > lo && v1 < hi && v2 > lo && v2 < hi) {
        return Err(Error::Infeasible(
            "the optimum lies on the boundary of the open domain".into(),
        ));
    }

    let (r1, r2) = (ratio(0, v1), ratio(1, v2));
    let ratio_residual = (r1 - r2).abs() / r1.max(r2);
    let constraint_residual = model.constraint(0, 1, v1, v2).abs();
    if ratio_residual > settings.root_tolerance || constraint_residual > settings.root_tolerance {
        return Err(Error::NoKktPoint {
            best_residual: ratio_residual.max(constraint_residual),
        });
    }

    let (g1, _) = model.constraint_grad(0, 1, v1, v2);
    let lambda = model.cost_grad(0, v1) / -g1;
    assemble_solution(model, vec![v1, v2], vec![lambda], settings, &problem.profiles)
}
