//! Closed-form entanglement calculus for isotropic two-qubit states.
//!
//! An isotropic state of fidelity `F` is a mixture of `|phi+>` with weight
//! `w = (4F - 1)/3` and white noise. Swapping two such states multiplies
//! their weights, so an `l`-edge chain has weight `prod w_i` and fidelity
//! `1/4 + 3/4 * prod w_i`. Success probabilities of heralded links multiply.

mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::netmodel::Backbone;

pub use oracle::swap_oracle_isotropic;

/// Werner weight `(4F - 1)/3` of an isotropic state.
#[inline]
pub fn werner_weight(fidelity: f64) -> f64 {
    (4.0 * fidelity - 1.0) / 3.0
}

/// Inverse of [`werner_weight`].
#[inline]
pub fn fidelity_from_weight(weight: f64) -> f64 {
    0.25 + 0.75 * weight
}

/// End-to-end fidelity and success probability of a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    pub fidelity: f64,
    pub probability: f64,
}

/// Inputs to the secure key rate besides the final fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KeyRateRecord", into = "KeyRateRecord")]
pub struct KeyRateParams {
    rep_rate: f64,
    path_probability: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyRateRecord {
    rep_rate: f64,
    path_probability: f64,
}

impl TryFrom<KeyRateRecord> for KeyRateParams {
    type Error = Error;
    fn try_from(r: KeyRateRecord) -> Result<Self> {
        KeyRateParams::new(r.rep_rate, r.path_probability)
    }
}

impl From<KeyRateParams> for KeyRateRecord {
    fn from(k: KeyRateParams) -> Self {
        KeyRateRecord {
            rep_rate: k.rep_rate,
            path_probability: k.path_probability,
        }
    }
}

impl KeyRateParams {
    /// `rep_rate` in Hz (> 0); `path_probability` in [0, 1].
    pub fn new(rep_rate: f64, path_probability: f64) -> Result<Self> {
        if !(rep_rate > 0.0 && rep_rate.is_finite()) {
            return Err(Error::OutOfRange {
                name: "repetition rate",
                value: rep_rate,
                range: "(0, inf)",
            });
        }
        Ok(KeyRateParams {
            rep_rate,
            path_probability: check_unit("path probability", path_probability)?,
        })
    }

    pub fn rep_rate(&self) -> f64 {
        self.rep_rate
    }

    pub fn path_probability(&self) -> f64 {
        self.path_probability
    }
}

/// Fidelity after swapping two isotropic pairs at a shared node.
pub fn swap_pair(f1: f64, f2: f64) -> Result<f64> {
    check_unit("fidelity", f1)?;
    check_unit("fidelity", f2)?;
    Ok(fidelity_from_weight(werner_weight(f1) * werner_weight(f2)))
}

/// Fidelity of a chain of (possibly distinct) edges joined by swaps.
pub fn chain_fidelity(fidelities: &[f64]) -> Result<f64> {
    match fidelities {
        [] => Err(Error::Empty("fidelity list")),
        // zero swaps: the edge state itself
        [f] => check_unit("fidelity", *f),
        _ => {
            let mut weight = 1.0;
            for &f in fidelities {
                weight *= werner_weight(check_unit("fidelity", f)?);
            }
            Ok(fidelity_from_weight(weight))
        }
    }
}

/// Success probability of a chain: the product of per-edge probabilities.
pub fn chain_probability(probabilities: &[f64]) -> Result<f64> {
    if probabilities.is_empty() {
        return Err(Error::Empty("probability list"));
    }
    probabilities
        .iter()
        .try_fold(1.0, |acc, &p| Ok(acc * check_unit("probability", p)?))
}

fn check_hops(hops: usize) -> Result<()> {
    if hops == 0 {
        Err(Error::OutOfRange {
            name: "path length",
            value: 0.0,
            range: ">= 1",
        })
    } else {
        Ok(())
    }
}

/// Fidelity of an `hops`-edge path with i.i.d. edges of mean fidelity
/// `mean_fidelity`.
pub fn avg_path_fidelity(mean_fidelity: f64, hops: usize) -> Result<f64> {
    check_unit("mean fidelity", mean_fidelity)?;
    check_hops(hops)?;
    if hops == 1 {
        return Ok(mean_fidelity);
    }
    Ok(fidelity_from_weight(werner_weight(mean_fidelity).powi(hops as i32)))
}

/// Success probability of an `hops`-edge path.
pub fn avg_path_probability(mean_probability: f64, hops: usize) -> Result<f64> {
    check_unit("mean probability", mean_probability)?;
    check_hops(hops)?;
    Ok(mean_probability.powi(hops as i32))
}

/// Probability that at least one of `attempts` independent tries succeeds.
/// `attempts` is a real number (continuous relaxation).
pub fn multiplexed_probability(bare: f64, attempts: f64) -> Result<f64> {
    if !(bare > 0.0 && bare < 1.0) {
        return Err(Error::DegenerateBareProbability(bare));
    }
    if !(attempts >= 1.0) {
        return Err(Error::OutOfRange {
            name: "attempts",
            value: attempts,
            range: ">= 1",
        });
    }
    Ok(-(attempts * (-bare).ln_1p()).exp_m1())
}

/// Parameters between `n_A` and `n_B` when the two local segments are joined
/// through the backbone by swaps at both gateways.
pub fn end_to_end_params(
    f_l1: f64,
    f_l2: f64,
    backbone: &Backbone,
    eta_l1: f64,
    eta_l2: f64,
) -> Result<PathParams> {
    let a = check_unit("segment fidelity", f_l1)?;
    let b = check_unit("segment fidelity", f_l2)?;
    check_unit("segment probability", eta_l1)?;
    check_unit("segment probability", eta_l2)?;
    let s = backbone.fidelity();
    let fidelity = (16.0 * a * b * s - 4.0 * a * b - 4.0 * s * a - 4.0 * b * s + a + b + s + 2.0) / 9.0;
    Ok(PathParams {
        fidelity,
        probability: eta_l1 * backbone.probability() * eta_l2,
    })
}

/// Binary Shannon entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_unit("entropy argument", x)?;
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.log2() };
    Ok(term(x) + term(1.0 - x))
}

/// Asymptotic secure key yield per pair, `1 - 2 h(1 - F)`, clamped at zero.
pub fn secure_key_fraction(fidelity: f64) -> Result<f64> {
    let f = check_unit("fidelity", fidelity)?;
    Ok((1.0 - 2.0 * binary_entropy(1.0 - f)?).max(0.0))
}

/// Secure key rate in Hz.
pub fn secure_key_rate(params: &KeyRateParams, fidelity: f64) -> Result<f64> {
    Ok(params.rep_rate * params.path_probability * secure_key_fraction(fidelity)?)
}
