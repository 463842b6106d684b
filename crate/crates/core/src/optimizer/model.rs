//! Separable pairwise problems in two coordinate systems.
//!
//! In the natural coordinates `v_i` (average edge fidelity or probability)
//! each network has a strictly increasing cost `C_i(v_i)` and every pair
//! `i < j` carries a constraint `c_ij(v_i, v_j) <= 0`.
//!
//! Both constraint families depend on `(v_i, v_j)` only through a product
//! `q_i(v_i) q_j(v_j)` with `q = w^l` (fidelity, Werner weight `w`) or
//! `q = eta^l` (probability). In log coordinates `a_i = ln q_i` the
//! constraints become linear, `a_i + a_j >= bound`, and each cost is a convex
//! increasing function of `a_i`. Newton iterations run in `a`; everything that
//! is reported or verified is evaluated in `v`.

use crate::costs::effective_fidelity_target;
use crate::entanglement::{fidelity_from_weight, werner_weight};
use crate::error::{Error, Result};
use crate::netmodel::SubNetworkProfile;

use super::Parameter;

#[derive(Debug, Clone)]
pub(crate) struct PairModel {
    pub parameter: Parameter,
    edges: Vec<f64>,
    hops: Vec<f64>,
    /// `|ln(1 - eta_bare)|` per network; unused for fidelity.
    log_bare: Vec<f64>,
    /// Constraint constant: `1/4 + f_eff` for fidelity, `eta_Th` for
    /// probability.
    offset: f64,
    /// Product prefactor: `9/4` for fidelity, `eta*` for probability.
    scale: f64,
    /// Per-edge multiplexing constant.
    per_edge: f64,
}

impl PairModel {
    pub fn fidelity(
        profiles: &[SubNetworkProfile],
        threshold: f64,
        backbone_fidelity: f64,
    ) -> Result<Self> {
        let f_eff = effective_fidelity_target(threshold, backbone_fidelity)?;
        Ok(PairModel {
            parameter: Parameter::Fidelity,
            edges: profiles.iter().map(|p| p.edge_count() as f64).collect(),
            hops: profiles.iter().map(|p| p.l_max() as f64).collect(),
            log_bare: vec![0.0; profiles.len()],
            offset: 0.25 + f_eff,
            scale: 2.25,
            per_edge: 1.0,
        })
    }

    pub fn probability(
        profiles: &[SubNetworkProfile],
        threshold: f64,
        backbone_probability: f64,
        per_edge: f64,
    ) -> Result<Self> {
        Ok(PairModel {
            parameter: Parameter::Probability,
            edges: profiles.iter().map(|p| p.edge_count() as f64).collect(),
            hops: profiles.iter().map(|p| p.l_max() as f64).collect(),
            log_bare: profiles.iter().map(|p| -(-p.eta_bare()).ln_1p()).collect(),
            offset: threshold,
            scale: backbone_probability,
            per_edge,
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    /// Open interval of admissible values.
    pub fn domain(&self) -> (f64, f64) {
        match self.parameter {
            Parameter::Fidelity => (0.25, 1.0),
            Parameter::Probability => (0.0, 1.0),
        }
    }

    /// Largest achievable value of the pair product; constraints can only be
    /// met in the open domain if `offset < scale`.
    pub fn offset_scale(&self) -> (f64, f64) {
        (self.offset, self.scale)
    }

    /// `ln(offset / scale)`: the linear bound `a_i + a_j >= bound`.
    pub fn log_bound(&self) -> Result<f64> {
        if !(self.offset > 0.0) {
            return Err(Error::Infeasible(
                "the constraint never binds; the optimum lies on the lower domain boundary".into(),
            ));
        }
        if !(self.offset < self.scale) {
            return Err(Error::Infeasible(
                "thresholds are only reachable at the excluded domain boundary".into(),
            ));
        }
        Ok((self.offset / self.scale).ln())
    }

    // ---- natural coordinates ----

    /// Per-network factor `q_i(v)` entering the constraint product.
    fn factor(&self, i: usize, v: f64) -> f64 {
        let l = self.hops[i] as i32;
        match self.parameter {
            Parameter::Fidelity => werner_weight(v).powi(l),
            Parameter::Probability => v.powi(l),
        }
    }

    /// `d q_i / d v`.
    fn factor_grad(&self, i: usize, v: f64) -> f64 {
        let l = self.hops[i];
        match self.parameter {
            Parameter::Fidelity => l * werner_weight(v).powi(l as i32 - 1) * (4.0 / 3.0),
            Parameter::Probability => l * v.powi(l as i32 - 1),
        }
    }

    pub fn cost(&self, i: usize, v: f64) -> f64 {
        match self.parameter {
            Parameter::Fidelity => self.edges[i] / (1.0 - v).sqrt(),
            Parameter::Probability => {
                self.per_edge * self.edges[i] * (-(-v).ln_1p()) / self.log_bare[i]
            }
        }
    }

    pub fn cost_grad(&self, i: usize, v: f64) -> f64 {
        match self.parameter {
            Parameter::Fidelity => 0.5 * self.edges[i] * (1.0 - v).powf(-1.5),
            Parameter::Probability => self.per_edge * self.edges[i] / ((1.0 - v) * self.log_bare[i]),
        }
    }

    pub fn total_cost(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(i, &v)| self.cost(i, v)).sum()
    }

    /// Constraint between networks `i` and `j`; `<= 0` is feasible.
    pub fn constraint(&self, i: usize, j: usize, vi: f64, vj: f64) -> f64 {
        self.offset - self.scale * self.factor(i, vi) * self.factor(j, vj)
    }

    /// `(d c_ij / d v_i, d c_ij / d v_j)`.
    pub fn constraint_grad(&self, i: usize, j: usize, vi: f64, vj: f64) -> (f64, f64) {
        (
            -self.scale * self.factor_grad(i, vi) * self.factor(j, vj),
            -self.scale * self.factor(i, vi) * self.factor_grad(j, vj),
        )
    }

    // ---- log coordinates ----

    #[cfg(test)]
    pub fn to_log(&self, i: usize, v: f64) -> f64 {
        let l = self.hops[i];
        match self.parameter {
            Parameter::Fidelity => l * werner_weight(v).ln(),
            Parameter::Probability => l * v.ln(),
        }
    }

    pub fn from_log(&self, i: usize, a: f64) -> f64 {
        let u = (a / self.hops[i]).exp();
        match self.parameter {
            Parameter::Fidelity => fidelity_from_weight(u),
            Parameter::Probability => u,
        }
    }

    /// First and second derivative of the cost with respect to `a_i`.
    pub fn log_cost_derivs(&self, i: usize, a: f64) -> (f64, f64) {
        let l = self.hops[i];
        let u = (a / l).exp();
        // 1 - u without cancellation for u close to 1
        let one_minus_u = -(a / l).exp_m1();
        match self.parameter {
            Parameter::Fidelity => {
                // C = |E| (4/3)^(1/2) (1 - u)^(-1/2)
                let k = self.edges[i] * (4.0f64 / 3.0).sqrt() * 0.5;
                let d1 = k * u * one_minus_u.powf(-1.5) / l;
                let d2 = k * (u * one_minus_u.powf(-1.5) + 1.5 * u * u * one_minus_u.powf(-2.5)) / (l * l);
                (d1, d2)
            }
            Parameter::Probability => {
                // C = c |E| (-ln(1 - u)) / |ln(1 - eta_bare)|
                let k = self.per_edge * self.edges[i] / self.log_bare[i];
                let d1 = k * u / one_minus_u / l;
                let d2 = k * u / (one_minus_u * one_minus_u) / (l * l);
                (d1, d2)
            }
        }
    }

    /// `-d c_ij / d a_i`, identical for both endpoints.
    pub fn log_constraint_slope(&self, ai: f64, aj: f64) -> f64 {
        self.scale * (ai + aj).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profiles() -> Vec<SubNetworkProfile> {
        vec![
            SubNetworkProfile::new(1000, 3, 0.1).unwrap(),
            SubNetworkProfile::new(200, 2, 0.2).unwrap(),
        ]
    }

    fn models() -> [PairModel; 2] {
        [
            PairModel::fidelity(&profiles(), 0.9, 0.98).unwrap(),
            PairModel::probability(&profiles(), 0.01, 0.9, 1.0).unwrap(),
        ]
    }

    #[test]
    fn log_round_trip() {
        for m in models() {
            for v in [0.4, 0.8, 0.97] {
                let a = m.to_log(0, v);
                assert!((m.from_log(0, a) - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for m in models() {
            for &v in &[0.5, 0.9, 0.95] {
                for i in 0..2 {
                    let h = 1e-6;
                    let fd = (m.cost(i, v + h) - m.cost(i, v - h)) / (2.0 * h);
                    assert!((fd - m.cost_grad(i, v)).abs() <= 1e-6 * fd.abs());

                    let a = m.to_log(i, v);
                    let (d1, d2) = m.log_cost_derivs(i, a);
                    let c = |a: f64| m.cost(i, m.from_log(i, a));
                    let fd1 = (c(a + h) - c(a - h)) / (2.0 * h);
                    let fd2 = (c(a + 1e-4) - 2.0 * c(a) + c(a - 1e-4)) / 1e-8;
                    assert!((fd1 - d1).abs() <= 1e-6 * d1.abs(), "{fd1} vs {d1}");
                    assert!((fd2 - d2).abs() <= 1e-4 * d2.abs(), "{fd2} vs {d2}");
                }
                let (gi, gj) = m.constraint_grad(0, 1, v, 0.93);
                let h = 1e-6;
                let fdi = (m.constraint(0, 1, v + h, 0.93) - m.constraint(0, 1, v - h, 0.93)) / (2.0 * h);
                let fdj = (m.constraint(0, 1, v, 0.93 + h) - m.constraint(0, 1, v, 0.93 - h)) / (2.0 * h);
                assert!((fdi - gi).abs() <= 1e-6 * gi.abs().max(1e-3));
                assert!((fdj - gj).abs() <= 1e-6 * gj.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn fidelity_constraint_matches_public_g() {
        let m = &models()[0];
        let g = crate::costs::fidelity_constraint_g(0.97, 0.95, 3, 2, 0.9, 0.98).unwrap();
        assert!((m.constraint(0, 1, 0.97, 0.95) - g).abs() < 1e-12);
        let h = crate::costs::probability_constraint_h(0.6, 0.7, 3, 2, 0.01, 0.9).unwrap();
        assert!((models()[1].constraint(0, 1, 0.6, 0.7) - h).abs() < 1e-15);
    }
}
