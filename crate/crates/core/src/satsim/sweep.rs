//! P_SAT over a grid of mean edge fidelities and demand ratios.
//!
//! Work units are `(grid index, ratio index, sample index)` triples. Each
//! unit draws its edge states from
//! `master ^ mix(EDGE, grid, ratio, sample, network)`. Demands come from
//! `master ^ mix(DEMAND, ratio, sample)` and are therefore shared by every
//! grid point of the same `(ratio, sample)`: along the fidelity axis only the
//! edge states change, which keeps curves monotone for homogeneous edges.
//! Results are reduced in index order, so the output does not depend on the
//! number of threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_demands, Criteria, Route, Topology};
use crate::error::{Error, Result};
use crate::netmodel::{sample_edge_states, EdgeStates, ParameterDistribution};
use crate::seeds::derive_seed;

const DEMAND_TAG: u64 = 0xD3;
const EDGE_TAG: u64 = 0xED;

fn default_samples() -> usize {
    20
}

/// Sweep grid and sampling setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Locations of the edge fidelity distribution.
    pub fidelity_grid: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Shape of the edge fidelity distribution; its mean is replaced by each
    /// grid value.
    pub fidelity: ParameterDistribution,
    pub probability: ParameterDistribution,
    pub demand_count: usize,
    #[serde(default = "default_samples")]
    pub config_samples: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.fidelity_grid.is_empty() {
            return Err(Error::Empty("fidelity grid"));
        }
        if self.ratios.is_empty() {
            return Err(Error::Empty("ratio list"));
        }
        if self.demand_count == 0 {
            return Err(Error::Empty("demand list"));
        }
        if self.config_samples == 0 {
            return Err(Error::Empty("configuration samples"));
        }
        for &m in &self.fidelity_grid {
            self.fidelity.with_mean(m)?;
        }
        for &r in &self.ratios {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::OutOfRange {
                    name: "demand ratio",
                    value: r,
                    range: "[0, 1]",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mean_fidelity: f64,
    pub r: f64,
    pub mean_psat: f64,
    /// Sample standard deviation across configurations.
    pub std_psat: f64,
    pub samples: usize,
}

/// Rows in grid order, ratios varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Rows for one ratio, in grid order.
    pub fn series(&self, r: f64) -> Vec<SweepRow> {
        self.rows.iter().copied().filter(|row| row.r == r).collect()
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_unit(
    topology: &Topology,
    criteria: &Criteria,
    spec: &SweepSpec,
    routes: &[Route],
    master: u64,
    (fi, ri, si): (usize, usize, usize),
) -> Result<f64> {
    let fdist = spec.fidelity.with_mean(spec.fidelity_grid[fi])?;
    let states = topology
        .networks()
        .iter()
        .enumerate()
        .map(|(net, g)| {
            let seed = derive_seed(master, &[EDGE_TAG, fi as u64, ri as u64, si as u64, net as u64]);
            sample_edge_states(g, &fdist, &spec.probability, seed)
        })
        .collect::<Result<Vec<EdgeStates>>>()?;
    let mut ok = 0usize;
    for route in routes {
        if criteria.judge(route, &states)?.satisfied {
            ok += 1;
        }
    }
    Ok(ok as f64 / routes.len() as f64)
}

/// Mean and spread of P_SAT for every `(grid value, ratio)` pair.
/// `threads` caps the worker count; `None` uses the global pool.
pub fn sweep_transition(
    topology: &Topology,
    criteria: &Criteria,
    spec: &SweepSpec,
    master_seed: u64,
    threads: Option<usize>,
) -> Result<SweepResult> {
    spec.validate()?;
    let work = || -> Result<SweepResult> {
        let (nr, ns) = (spec.ratios.len(), spec.config_samples);
        let routes: Vec<Vec<Route>> = (0..nr * ns)
            .into_par_iter()
            .map(|k| {
                let (ri, si) = (k / ns, k % ns);
                let seed = derive_seed(master_seed, &[DEMAND_TAG, ri as u64, si as u64]);
                generate_demands(topology, spec.demand_count, spec.ratios[ri], seed)?
                    .iter()
                    .map(|d| topology.route(d))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let units: Vec<(usize, usize, usize)> = (0..spec.fidelity_grid.len())
            .flat_map(|fi| (0..nr).flat_map(move |ri| (0..ns).map(move |si| (fi, ri, si))))
            .collect();
        let psat: Vec<f64> = units
            .par_iter()
            .map(|&(fi, ri, si)| {
                run_unit(topology, criteria, spec, &routes[ri * ns + si], master_seed, (fi, ri, si))
            })
            .collect::<Result<_>>()?;
        let rows = psat
            .chunks(ns)
            .enumerate()
            .map(|(k, vals)| {
                let (mean_psat, std_psat) = mean_std(vals);
                SweepRow {
                    mean_fidelity: spec.fidelity_grid[k / nr],
                    r: spec.ratios[k % nr],
                    mean_psat,
                    std_psat,
                    samples: ns,
                }
            })
            .collect();
        Ok(SweepResult { rows })
    };
    match threads {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?
            .install(work),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::TaskThresholds;
    use crate::netmodel::{generate_random_subnetwork, Backbone};
    use crate::satsim::Mode;

    fn setup() -> (Topology, Criteria) {
        let t = Topology::new(vec![
            generate_random_subnetwork(12, 20, 1).unwrap(),
            generate_random_subnetwork(12, 20, 2).unwrap(),
        ])
        .unwrap();
        let c = Criteria::new(
            Backbone::new(0.99, 0.9).unwrap(),
            TaskThresholds::fidelity_probability(0.9, 0.016).unwrap(),
            Mode::Threshold,
        )
        .unwrap();
        (t, c)
    }

    fn spec(grid: Vec<f64>, fidelity: ParameterDistribution) -> SweepSpec {
        SweepSpec {
            fidelity_grid: grid,
            ratios: vec![0.1, 0.9],
            fidelity,
            probability: ParameterDistribution::homogeneous(0.9).unwrap(),
            demand_count: 50,
            config_samples: 5,
        }
    }

    #[test]
    fn extremes_of_the_grid() {
        let (t, c) = setup();
        let res = sweep_transition(&t, &c, &spec(vec![0.5, 1.0], ParameterDistribution::homogeneous(1.0).unwrap()), 3, None).unwrap();
        assert_eq!(res.rows.len(), 4);
        for row in &res.rows {
            let expect = if row.mean_fidelity == 1.0 { 1.0 } else { 0.0 };
            assert_eq!(row.mean_psat, expect);
            assert_eq!(row.std_psat, 0.0);
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let (t, c) = setup();
        let s = spec(vec![0.9, 0.95, 1.0], ParameterDistribution::truncated_normal(0.95, 0.05).unwrap());
        let a = sweep_transition(&t, &c, &s, 11, Some(1)).unwrap();
        let b = sweep_transition(&t, &c, &s, 11, Some(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sweep_transition(&t, &c, &s, 12, Some(4)).unwrap());
    }

    #[test]
    fn rows_follow_grid_then_ratio_order() {
        let (t, c) = setup();
        let res = sweep_transition(&t, &c, &spec(vec![0.92, 0.96], ParameterDistribution::homogeneous(1.0).unwrap()), 0, None).unwrap();
        let keys: Vec<_> = res.rows.iter().map(|r| (r.mean_fidelity, r.r)).collect();
        assert_eq!(keys, vec![(0.92, 0.1), (0.92, 0.9), (0.96, 0.1), (0.96, 0.9)]);
        assert_eq!(res.series(0.9).len(), 2);
    }

    #[test]
    fn invalid_specs() {
        let (t, c) = setup();
        let mut s = spec(vec![], ParameterDistribution::homogeneous(1.0).unwrap());
        assert!(sweep_transition(&t, &c, &s, 0, None).is_err());
        s.fidelity_grid = vec![1.2];
        assert!(sweep_transition(&t, &c, &s, 0, None).is_err());
        s.fidelity_grid = vec![0.9];
        s.ratios = vec![1.5];
        assert!(sweep_transition(&t, &c, &s, 0, None).is_err());
    }
}
