//! Exhaustive grid reference solution for up to three sub-networks.
//!
//! Only the public constraint and cost functions are used. The grid covers
//! the open domain at spacing `resolution`. For every grid point of the
//! first `N - 1` coordinates the last coordinate takes the smallest grid
//! value meeting all of its constraints: costs increase and constraints
//! decrease in every coordinate, so this is the cheapest feasible completion
//! and the result equals a full scan of the grid.

use serde::{Deserialize, Serialize};

use super::{OptimizationProblem, Parameter};
use crate::costs::{fidelity_constraint_g, probability_constraint_h, purification_cost};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub values: Vec<f64>,
    pub cost: f64,
    pub resolution: f64,
}

struct GridProblem<'a> {
    problem: &'a OptimizationProblem,
    parameter: Parameter,
    threshold: f64,
}

impl GridProblem<'_> {
    fn cost(&self, i: usize, v: f64) -> f64 {
        let p = &self.problem.profiles[i];
        match self.parameter {
            Parameter::Fidelity => purification_cost(p.edge_count(), v).unwrap_or(f64::INFINITY),
            Parameter::Probability => {
                self.problem.settings.multiplexing_constant
                    * p.edge_count() as f64
                    * ((1.0 - v).ln() / (1.0 - p.eta_bare()).ln())
            }
        }
    }

    fn satisfied(&self, i: usize, j: usize, vi: f64, vj: f64) -> bool {
        let (pi, pj) = (&self.problem.profiles[i], &self.problem.profiles[j]);
        let bb = &self.problem.backbone;
        let c = match self.parameter {
            Parameter::Fidelity => {
                fidelity_constraint_g(vi, vj, pi.l_max(), pj.l_max(), self.threshold, bb.fidelity())
            }
            Parameter::Probability => {
                probability_constraint_h(vi, vj, pi.l_max(), pj.l_max(), self.threshold, bb.probability())
            }
        };
        matches!(c, Ok(x) if x <= 0.0)
    }
}

fn grid_points(lo: f64, hi: f64, resolution: f64) -> Vec<f64> {
    (1..)
        .map(|k| lo + k as f64 * resolution)
        .take_while(|&v| v < hi)
        .collect()
}

/// Min-cost feasible grid point, or `None` if no grid point is feasible.
pub fn grid_oracle(
    problem: &OptimizationProblem,
    parameter: Parameter,
    resolution: f64,
) -> Result<Option<GridSolution>> {
    let n = problem.profiles.len();
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported(format!("grid oracle supports 2 or 3 networks, got {n}")));
    }
    if !(resolution > 0.0 && resolution < 0.5) {
        return Err(Error::OutOfRange {
            name: "grid resolution",
            value: resolution,
            range: "(0, 0.5)",
        });
    }
    let (threshold, (lo, hi)) = match parameter {
        Parameter::Fidelity => (problem.thresholds.require_fidelity()?, (0.25, 1.0)),
        Parameter::Probability => (problem.thresholds.require_probability()?, (0.0, 1.0)),
    };
    let gp = GridProblem {
        problem,
        parameter,
        threshold,
    };
    let grid = grid_points(lo, hi, resolution);
    let costs: Vec<Vec<f64>> = (0..n)
        .map(|i| grid.iter().map(|&v| gp.cost(i, v)).collect())
        .collect();
    let last = n - 1;

    // smallest grid index for the last coordinate compatible with `fixed`
    let completion = |fixed: &[f64]| -> Option<usize> {
        let ok = |k: usize| (0..last).all(|i| gp.satisfied(i, last, fixed[i], grid[k]));
        if !ok(grid.len() - 1) {
            return None;
        }
        let (mut lo_k, mut hi_k) = (0usize, grid.len() - 1);
        if ok(0) {
            return Some(0);
        }
        while hi_k - lo_k > 1 {
            let mid = (lo_k + hi_k) / 2;
            if ok(mid) {
                hi_k = mid;
            } else {
                lo_k = mid;
            }
        }
        Some(hi_k)
    };

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut consider = |idx: Vec<usize>| {
        let cost: f64 = idx.iter().enumerate().map(|(i, &k)| costs[i][k]).sum();
        if best.as_ref().map_or(true, |(c, _)| cost < *c) {
            best = Some((cost, idx));
        }
    };
    match n {
        2 => {
            for k0 in 0..grid.len() {
                if let Some(k1) = completion(&[grid[k0]]) {
                    consider(vec![k0, k1]);
                }
            }
        }
        _ => {
            for k0 in 0..grid.len() {
                for k1 in 0..grid.len() {
                    if !gp.satisfied(0, 1, grid[k0], grid[k1]) {
                        continue;
                    }
                    if let Some(k2) = completion(&[grid[k0], grid[k1]]) {
                        consider(vec![k0, k1, k2]);
                    }
                }
            }
        }
    }
    Ok(best.map(|(cost, idx)| GridSolution {
        values: idx.into_iter().map(|k| grid[k]).collect(),
        cost,
        resolution,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::TaskThresholds;
    use crate::netmodel::{Backbone, SubNetworkProfile};

    fn problem(nets: &[(usize, usize)], bb: (f64, f64), th: (f64, f64)) -> OptimizationProblem {
        OptimizationProblem::new(
            nets.iter()
                .map(|&(e, l)| SubNetworkProfile::new(e, l, 0.1).unwrap())
                .collect(),
            Backbone::new(bb.0, bb.1).unwrap(),
            TaskThresholds::fidelity_probability(th.0, th.1).unwrap(),
        )
        .unwrap()
    }

    fn full_scan(p: &OptimizationProblem, parameter: Parameter, res: f64) -> Option<(f64, Vec<f64>)> {
        let gp = GridProblem {
            problem: p,
            parameter,
            threshold: match parameter {
                Parameter::Fidelity => p.thresholds.fidelity().unwrap(),
                Parameter::Probability => p.thresholds.probability().unwrap(),
            },
        };
        let grid = match parameter {
            Parameter::Fidelity => grid_points(0.25, 1.0, res),
            Parameter::Probability => grid_points(0.0, 1.0, res),
        };
        let n = p.profiles.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        let total = grid.len().pow(n as u32);
        for mut code in 0..total {
            let vals: Vec<f64> = (0..n)
                .map(|_| {
                    let v = grid[code % grid.len()];
                    code /= grid.len();
                    v
                })
                .collect();
            let feasible = (0..n).all(|i| (i + 1..n).all(|j| gp.satisfied(i, j, vals[i], vals[j])));
            if feasible {
                let c: f64 = (0..n).map(|i| gp.cost(i, vals[i])).sum();
                if best.as_ref().map_or(true, |(b, _)| c < *b) {
                    best = Some((c, vals));
                }
            }
        }
        best
    }

    #[test]
    fn completion_shortcut_equals_full_scan() {
        for parameter in [Parameter::Fidelity, Parameter::Probability] {
            let p = problem(&[(1000, 3), (500, 2), (200, 2)], (0.99, 0.9), (0.85, 0.05));
            let g = grid_oracle(&p, parameter, 0.02).unwrap().unwrap();
            let (c, v) = full_scan(&p, parameter, 0.02).unwrap();
            assert!((g.cost - c).abs() <= 1e-9 * c);
            assert_eq!(g.values.len(), v.len());
        }
    }

    #[test]
    fn infeasible_grid_is_empty() {
        let p = problem(&[(100, 2), (100, 2)], (1.0, 0.4), (0.9, 0.5));
        assert_eq!(grid_oracle(&p, Parameter::Probability, 0.01).unwrap(), None);
    }

    #[test]
    fn symmetric_grid_argmin_near_closed_form() {
        let p = problem(&[(300, 2), (300, 2)], (1.0, 1.0), (0.9, 0.016));
        let g = grid_oracle(&p, Parameter::Probability, 1e-3).unwrap().unwrap();
        let exact = 0.016f64.powf(0.25);
        for v in g.values {
            assert!((v - exact).abs() <= 2e-3, "{v}");
        }
    }

    #[test]
    fn rejects_large_problems() {
        let p = problem(&[(10, 1); 4], (1.0, 1.0), (0.9, 0.1));
        assert!(grid_oracle(&p, Parameter::Fidelity, 0.1).is_err());
    }
}
