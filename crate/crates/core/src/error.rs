use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its valid range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("no simple connected graph with {nodes} nodes and {edges} edges")]
    InfeasibleGraph { nodes: usize, edges: usize },

    #[error("no connected graph drawn after {0} rejections")]
    ResampleLimitExceeded(usize),

    #[error("nodes {0} and {1} are not connected")]
    Disconnected(usize, usize),

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("network '{0}' has nodes without coordinates")]
    MissingCoordinates(String),

    #[error("backbone fidelity {0} must exceed 1/4")]
    BackboneTooWeak(f64),

    #[error("edge fidelity 1 requires unbounded purification resources")]
    SaturatedFidelity,

    #[error("edge probability 1 requires unbounded multiplexing attempts")]
    SaturatedProbability,

    #[error("target probability {target} is below the bare probability {bare}")]
    TargetBelowBare { target: f64, bare: f64 },

    #[error("bare probability {0} is degenerate (must lie strictly inside (0, 1))")]
    DegenerateBareProbability(f64),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no sign change in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("root finder hit the iteration limit at x = {0}")]
    IterationLimit(f64),

    #[error("no KKT point found (best stationarity residual {best_residual:e})")]
    NoKktPoint { best_residual: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid demand: {0}")]
    InvalidDemand(String),
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}
