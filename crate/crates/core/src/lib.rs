//! Modelling and optimisation of interconnected quantum sub-networks.
//!
//! * [`netmodel`]: sub-network graphs, random instances, edge sampling.
//! * [`entanglement`]: swap-chain fidelity/probability calculus and key rates.
//! * [`costs`]: pairwise threshold constraints and resource costs.
//! * [`optimizer`]: KKT solutions for the cost-minimal average edge parameters.
//! * [`satsim`]: Monte Carlo satisfiability of random connection demands.
//! * [`cli`]: the `qsubnet` command-line front end.

pub mod cli;
pub mod costs;
pub mod entanglement;
pub mod error;
pub mod netmodel;
pub mod optimizer;
pub mod satsim;
pub mod seeds;

pub use error::{Error, Result};
