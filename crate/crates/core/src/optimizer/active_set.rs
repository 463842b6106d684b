//! N sub-networks: enumerate candidate active sets and solve the KKT system
//! of each by damped Newton.
//!
//! In log coordinates (see `model`) the problem is
//! `min sum_i phi_i(a_i)  s.t.  a_i + a_j >= bound`, with every `phi_i`
//! convex and increasing, so the feasible set is a polyhedron and any KKT
//! point is a global minimum. For an active set `S` the Newton unknowns are
//! `a` and one multiplier `nu_s` per active pair:
//!
//! ```text
//! phi_i'(a_i) - sum_{s in S, i in s} nu_s = 0
//! a_i + a_j - bound                     = 0   for (i, j) in S
//! ```
//!
//! Candidates are pruned to sets that touch every network (each cost is
//! increasing, so each network needs a positive multiplier) and whose
//! constraint gradients are linearly independent. Any KKT multiplier vector
//! can be rewritten on a linearly independent subset of the active
//! gradients, so the pruning loses no KKT point.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{
    all_pairs, assemble_solution, ensure_feasible, kkt_residuals, KktSolution, OptimizationProblem,
    PairModel, Parameter, MAX_NETWORKS,
};
use crate::error::{Error, Result};

/// Start points as fractions of `bound` for every `a_i`.
const START_FRACTIONS: [f64; 5] = [0.5, 0.3, 0.7, 0.15, 0.85];

/// Optimal average edge fidelities for 2..=8 sub-networks.
pub fn solve_fidelity_n(problem: &OptimizationProblem) -> Result<KktSolution> {
    solve_n(problem, Parameter::Fidelity)
}

/// Optimal average edge probabilities for 2..=8 sub-networks.
pub fn solve_probability_n(problem: &OptimizationProblem) -> Result<KktSolution> {
    solve_n(problem, Parameter::Probability)
}

struct Candidate {
    /// Indices into `all_pairs(n)`, ascending.
    set: Vec<usize>,
    values: Vec<f64>,
    /// Natural-coordinate multipliers for every pair.
    lambdas: Vec<f64>,
    cost: f64,
}

fn solve_n(problem: &OptimizationProblem, parameter: Parameter) -> Result<KktSolution> {
    let n = problem.profiles.len();
    if n > MAX_NETWORKS {
        return Err(Error::Unsupported(format!(
            "active-set enumeration supports at most {MAX_NETWORKS} networks, got {n}"
        )));
    }
    ensure_feasible(problem, parameter)?;
    let model = problem.model(parameter)?;
    let bound = model.log_bound()?;
    let pairs = all_pairs(n);

    let sets: Vec<Vec<usize>> = ((n + 1) / 2..=n.min(pairs.len()))
        .flat_map(|k| (0..pairs.len()).combinations(k))
        .filter(|set| admissible(n, &pairs, set))
        .collect();

    let outcomes: Vec<std::result::Result<Candidate, f64>> = sets
        .into_par_iter()
        .map(|set| solve_candidate(problem, &model, &pairs, set, bound))
        .collect();

    let mut best: Option<Candidate> = None;
    let mut best_residual = f64::INFINITY;
    for outcome in outcomes {
        match outcome {
            Ok(c) => {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        let tie = (c.cost - b.cost).abs() <= 1e-12 * b.cost.abs();
                        if tie {
                            c.set < b.set
                        } else {
                            c.cost < b.cost
                        }
                    }
                };
                if better {
                    best = Some(c);
                }
            }
            Err(r) => best_residual = best_residual.min(r),
        }
    }
    let best = best.ok_or(Error::NoKktPoint { best_residual })?;
    assemble_solution(&model, best.values, best.lambdas, &problem.settings, &problem.profiles)
}

/// Covers every network and has linearly independent rows `e_i + e_j`.
///
/// Per connected component of the pair graph the rank of these rows is the
/// node count if the component contains an odd cycle and one less
/// otherwise.
fn admissible(n: usize, pairs: &[(usize, usize)], set: &[usize]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &k in set {
        let (i, j) = pairs[k];
        adj[i].push(j);
        adj[j].push(i);
    }
    if adj.iter().any(|a| a.is_empty()) {
        return false;
    }
    let mut colour = vec![usize::MAX; n];
    for root in 0..n {
        if colour[root] != usize::MAX {
            continue;
        }
        let mut nodes = 0;
        let mut degree_sum = 0;
        let mut bipartite = true;
        let mut stack = vec![root];
        colour[root] = 0;
        while let Some(u) = stack.pop() {
            nodes += 1;
            degree_sum += adj[u].len();
            for &w in &adj[u] {
                if colour[w] == usize::MAX {
                    colour[w] = 1 - colour[u];
                    stack.push(w);
                } else if colour[w] == colour[u] {
                    bipartite = false;
                }
            }
        }
        let edges = degree_sum / 2;
        let rank = if bipartite { nodes - 1 } else { nodes };
        if edges != rank {
            return false;
        }
    }
    true
}

fn solve_candidate(
    problem: &OptimizationProblem,
    model: &PairModel,
    pairs: &[(usize, usize)],
    set: Vec<usize>,
    bound: f64,
) -> std::result::Result<Candidate, f64> {
    let n = model.len();
    let m = set.len();
    let tol = problem.settings.kkt_tolerance;

    // a fully determined active set: reject cheaply if infeasible
    if m == n {
        let mut a_mat = DMatrix::<f64>::zeros(n, n);
        for (r, &k) in set.iter().enumerate() {
            let (i, j) = pairs[k];
            a_mat[(r, i)] = 1.0;
            a_mat[(r, j)] = 1.0;
        }
        let rhs = DVector::from_element(n, bound);
        let a = a_mat.lu().solve(&rhs).ok_or(f64::INFINITY)?;
        let slack = |x: f64| x * bound.abs().max(1.0);
        if a.iter().any(|&x| x >= 0.0)
            || pairs.iter().any(|&(i, j)| a[i] + a[j] < bound - slack(1e-12))
        {
            return Err(f64::INFINITY);
        }
    }

    let mut best_residual = f64::INFINITY;
    for &frac in &START_FRACTIONS {
        let Some((a, nu)) = newton(model, pairs, &set, bound, frac, problem.settings.max_iterations) else {
            continue;
        };
        if nu.iter().any(|&x| x < -tol) {
            continue;
        }
        let values: Vec<f64> = (0..n).map(|i| model.from_log(i, a[i])).collect();
        let (lo, hi) = model.domain();
        if values.iter().any(|&v| !(v > lo && v < hi)) {
            continue;
        }
        let mut lambdas = vec![0.0; pairs.len()];
        for (s, &k) in set.iter().enumerate() {
            let (i, j) = pairs[k];
            lambdas[k] = nu[s] / model.log_constraint_slope(a[i], a[j]);
        }
        let res = kkt_residuals(model, &values, &lambdas);
        let worst = res.max().max(res.active_gap);
        if worst <= tol {
            let cost = model.total_cost(&values);
            return Ok(Candidate {
                set,
                values,
                lambdas,
                cost,
            });
        }
        best_residual = best_residual.min(worst);
    }
    Err(best_residual)
}

/// Damped Newton on the active-set KKT system from `a_i = frac * bound`.
/// Returns `(a, nu)` on convergence.
fn newton(
    model: &PairModel,
    pairs: &[(usize, usize)],
    set: &[usize],
    bound: f64,
    frac: f64,
    max_iter: usize,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = model.len();
    let m = set.len();
    let mut a = vec![frac * bound; n];
    let mut nu: Vec<f64> = set
        .iter()
        .map(|&k| {
            let (i, j) = pairs[k];
            0.5 * (model.log_cost_derivs(i, a[i]).0 + model.log_cost_derivs(j, a[j]).0)
        })
        .collect();

    let residual = |a: &[f64], nu: &[f64]| -> (Vec<f64>, f64) {
        let mut r = vec![0.0; n + m];
        let mut merit = 0.0;
        for i in 0..n {
            r[i] = model.log_cost_derivs(i, a[i]).0;
        }
        let scale: Vec<f64> = r[..n].iter().map(|x| x.abs().max(1.0)).collect();
        for (s, &k) in set.iter().enumerate() {
            let (i, j) = pairs[k];
            r[i] -= nu[s];
            r[j] -= nu[s];
            r[n + s] = a[i] + a[j] - bound;
        }
        for i in 0..n {
            merit += (r[i] / scale[i]).powi(2);
        }
        for s in 0..m {
            merit += r[n + s].powi(2);
        }
        (r, merit)
    };

    let (mut r, mut merit) = residual(&a, &nu);
    for _ in 0..max_iter {
        if !merit.is_finite() {
            return None;
        }
        if merit <= 1e-28 {
            return Some((a, nu));
        }
        let mut jac = DMatrix::<f64>::zeros(n + m, n + m);
        for i in 0..n {
            jac[(i, i)] = model.log_cost_derivs(i, a[i]).1;
        }
        for (s, &k) in set.iter().enumerate() {
            let (i, j) = pairs[k];
            jac[(i, n + s)] = -1.0;
            jac[(j, n + s)] = -1.0;
            jac[(n + s, i)] = 1.0;
            jac[(n + s, j)] = 1.0;
        }
        let rhs = DVector::from_iterator(n + m, r.iter().map(|x| -x));
        let step = jac.lu().solve(&rhs)?;

        // stay strictly inside a < 0
        let mut t: f64 = 1.0;
        for i in 0..n {
            if step[i] > 0.0 {
                t = t.min(0.9 * -a[i] / step[i]);
            }
        }
        loop {
            let a_new: Vec<f64> = (0..n).map(|i| a[i] + t * step[i]).collect();
            let nu_new: Vec<f64> = (0..m).map(|s| nu[s] + t * step[n + s]).collect();
            let (r_new, merit_new) = residual(&a_new, &nu_new);
            if merit_new.is_finite() && merit_new <= (1.0 - 1e-4 * t) * merit {
                a = a_new;
                nu = nu_new;
                r = r_new;
                merit = merit_new;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                // no further progress: converged to roundoff or stuck
                return (merit <= 1e-20).then_some((a, nu));
            }
        }
    }
    (merit <= 1e-20).then_some((a, nu))
}
