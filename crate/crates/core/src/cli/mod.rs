//! Command-line front end. `run` parses arguments, dispatches a subcommand
//! and maps failures to exit codes:
//!
//! | code | meaning                     |
//! |------|-----------------------------|
//! | 0    | success                     |
//! | 2    | invalid flags or config     |
//! | 3    | random graph generation     |
//! | 4    | infeasible problem          |
//! | 5    | solver residual failure     |

mod config;
mod format;

pub use config::{DemandSpec, NetworkSpec, ResolvedNetwork, RunConfig, SimulateSpec};
pub use format::format_g12;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::costs::attempts_per_edge;
use crate::error::Error;
use crate::netmodel::{generate_random_subnetwork, sample_edge_states, EdgeStates, SubNetworkProfile};
use crate::optimizer::{grid_oracle, solve, KktSolution, OptimizationProblem, Parameter};
use crate::satsim::{evaluate_demand, generate_demands, sweep_transition, Demand, Topology};
use crate::seeds::derive_seed;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GENERATION: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_RESIDUAL: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "qsubnet", version, about = "Interconnected quantum sub-network planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a connected random sub-network graph.
    GenNetwork {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal average edge fidelity and probability per sub-network.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Compare against an exhaustive grid search (2 or 3 networks).
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Satisfiability sweep over mean edge fidelity and demand ratio.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Satisfiability of one sampled configuration with per-demand detail.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_) => EXIT_INFEASIBLE,
            Error::NoKktPoint { .. } | Error::NoBracket { .. } | Error::IterationLimit(_) => EXIT_RESIDUAL,
            Error::ResampleLimitExceeded(_) => EXIT_GENERATION,
            _ => EXIT_CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Provenance stamped into every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub version: &'static str,
    pub config_hash: String,
    pub master_seed: u64,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.message);
            e.code
        }
    }
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::GenNetwork {
            nodes,
            edges,
            seed,
            out,
        } => gen_network(*nodes, *edges, *seed, out.as_deref()),
        Command::Optimize { config, verify, out } => optimize(config, *verify, out.as_deref()),
        Command::Sweep {
            config,
            seed,
            threads,
            out,
        } => sweep(config, *seed, *threads, out.as_deref()),
        Command::Simulate { config, seed, out } => simulate(config, *seed, out.as_deref()),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::config(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::from_json(&text)?;
    for w in cfg.low_fidelity_warnings() {
        eprintln!("{w}");
    }
    Ok(cfg)
}

fn meta(cfg: &RunConfig, seed: u64) -> RunMeta {
    RunMeta {
        version: VERSION,
        config_hash: cfg.hash(),
        master_seed: seed,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn gen_network(nodes: usize, edges: usize, seed: u64, out: Option<&Path>) -> CliResult<()> {
    let graph = generate_random_subnetwork(nodes, edges, seed).map_err(|e| match e {
        Error::InfeasibleGraph { .. } => CliError::config(e.to_string()),
        other => other.into(),
    })?;
    let mut text = serde_json::to_string(&graph).expect("graph serializes");
    text.push('\n');
    write_output(out, &text)?;
    if let Some(out) = out {
        let flags = format!("gen-network --nodes {nodes} --edges {edges} --seed {seed}");
        let m = json!({
            "version": VERSION,
            "config_hash": config::hex(&<sha2::Sha256 as sha2::Digest>::digest(flags.as_bytes())),
            "master_seed": seed,
        });
        write_output(Some(&sidecar_path(out)), &to_json(&m))?;
    }
    Ok(())
}

fn profiles(cfg: &RunConfig) -> CliResult<Vec<SubNetworkProfile>> {
    cfg.networks
        .iter()
        .enumerate()
        .map(|(i, n)| {
            n.resolve()?.profile.ok_or_else(|| {
                CliError::config(format!("network {i} needs eta_bare for optimization"))
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct Verification {
    parameter: Parameter,
    resolution: f64,
    grid_values: Vec<f64>,
    grid_cost: f64,
    kkt_cost: f64,
    /// `grid_cost - kkt_cost`; non-negative when the KKT point is optimal.
    cost_gap: f64,
    max_distance: f64,
    agrees: bool,
}

fn verify(problem: &OptimizationProblem, sol: &KktSolution) -> CliResult<Option<Verification>> {
    let resolution = match problem.profiles.len() {
        2 => 1e-3,
        3 => 2e-3,
        _ => return Ok(None),
    };
    let Some(grid) = grid_oracle(problem, sol.parameter, resolution)? else {
        return Ok(None);
    };
    let max_distance = grid
        .values
        .iter()
        .zip(&sol.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let cost_gap = grid.cost - sol.total_cost;
    Ok(Some(Verification {
        parameter: sol.parameter,
        resolution,
        agrees: cost_gap >= -1e-9 * sol.total_cost && max_distance <= 2.0 * resolution,
        grid_values: grid.values,
        grid_cost: grid.cost,
        kkt_cost: sol.total_cost,
        cost_gap,
        max_distance,
    }))
}

fn optimize(config: &Path, with_verify: bool, out: Option<&Path>) -> CliResult<()> {
    let cfg = load_config(config)?;
    let profiles = profiles(&cfg)?;
    let problem = OptimizationProblem::new(profiles.clone(), cfg.backbone, cfg.thresholds)?
        .with_settings(cfg.optimizer);
    let fid = solve(&problem, Parameter::Fidelity)?;
    let prob = solve(&problem, Parameter::Probability)?;
    let attempts: Vec<f64> = prob
        .values
        .iter()
        .zip(&profiles)
        .map(|(&eta, p)| match attempts_per_edge(eta, p.eta_bare()) {
            Ok(n) => Ok(n.ceil().max(1.0)),
            Err(Error::TargetBelowBare { .. }) => Ok(1.0),
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;
    let mut doc = json!({
        "meta": meta(&cfg, cfg.master_seed),
        "fidelity_solution": fid,
        "probability_solution": prob,
        "costs": {
            "purification": fid.costs,
            "multiplexing": prob.costs,
            "purification_total": fid.total_cost,
            "multiplexing_total": prob.total_cost,
            "total": fid.total_cost + prob.total_cost,
        },
        "residuals": {"fidelity": fid.residuals, "probability": prob.residuals},
        "active_set": {"fidelity": fid.active_set, "probability": prob.active_set},
        "ceil_attempts_per_edge": attempts,
    });
    if with_verify {
        doc["verify"] = json!({
            "fidelity": verify(&problem, &fid)?,
            "probability": verify(&problem, &prob)?,
        });
    }
    write_output(out.or(cfg.output.as_deref()), &to_json(&doc))
}

fn topology(cfg: &RunConfig) -> CliResult<Topology> {
    let graphs = cfg
        .networks
        .iter()
        .enumerate()
        .map(|(i, n)| {
            n.resolve()?
                .graph
                .ok_or_else(|| CliError::config(format!("network {i} is a profile; a graph is required")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Topology::new(graphs)?)
}

/// CSV with 12 significant digits.
pub fn sweep_csv(rows: &[crate::satsim::SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mean_fidelity", "r", "mean_psat", "std_psat", "samples"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            format_g12(r.mean_fidelity),
            format_g12(r.r),
            format_g12(r.mean_psat),
            format_g12(r.std_psat),
            r.samples.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn sweep(config: &Path, seed: Option<u64>, threads: Option<usize>, out: Option<&Path>) -> CliResult<()> {
    let cfg = load_config(config)?;
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("config has no sweep section"))?;
    let seed = seed.unwrap_or(cfg.master_seed);
    let topo = topology(&cfg)?;
    let result = sweep_transition(&topo, &cfg.criteria()?, spec, seed, threads)?;
    let out = out.or(cfg.output.as_deref());
    write_output(out, &sweep_csv(&result.rows))?;
    let m = to_json(&meta(&cfg, seed));
    match out {
        Some(p) => write_output(Some(&sidecar_path(p)), &m),
        None => {
            eprint!("{m}");
            Ok(())
        }
    }
}

const SIM_EDGE_TAG: u64 = 0xED;
const SIM_DEMAND_TAG: u64 = 0xD3;

fn simulate(config: &Path, seed: Option<u64>, out: Option<&Path>) -> CliResult<()> {
    let cfg = load_config(config)?;
    let spec = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| CliError::config("config has no simulate section"))?;
    let seed = seed.unwrap_or(cfg.master_seed);
    let topo = topology(&cfg)?;
    let criteria = cfg.criteria()?;

    let states: Vec<EdgeStates> = match (&spec.edge_states, &spec.fidelity, &spec.probability) {
        (Some(states), _, _) => {
            if states.len() != topo.networks().len() {
                return Err(CliError::config("edge_states needs one list per network"));
            }
            for (i, (s, g)) in states.iter().zip(topo.networks()).enumerate() {
                if s.len() != g.edge_count() {
                    return Err(CliError::config(format!(
                        "network {i} has {} edges but {} edge states",
                        g.edge_count(),
                        s.len()
                    )));
                }
            }
            states.iter().cloned().map(EdgeStates).collect()
        }
        (None, Some(f), Some(p)) => topo
            .networks()
            .iter()
            .enumerate()
            .map(|(i, g)| sample_edge_states(g, f, p, derive_seed(seed, &[SIM_EDGE_TAG, i as u64])))
            .collect::<Result<_, _>>()?,
        _ => return Err(CliError::config("simulate needs edge states or distributions")),
    };
    let demands: Vec<Demand> = match (&spec.demands, spec.demand_count) {
        (Some(list), _) => list
            .iter()
            .map(|d| Demand::new(d.source, d.destination))
            .collect::<Result<_, _>>()?,
        (None, Some(n)) => generate_demands(&topo, n, spec.ratio, derive_seed(seed, &[SIM_DEMAND_TAG]))?,
        (None, None) => return Err(CliError::config("simulate needs demands or demand_count")),
    };
    let outcomes = demands
        .iter()
        .map(|d| evaluate_demand(&topo, &states, &criteria, d))
        .collect::<Result<Vec<_>, _>>()?;
    let satisfied = outcomes.iter().filter(|o| o.satisfied).count();
    let doc = json!({
        "meta": meta(&cfg, seed),
        "psat": satisfied as f64 / outcomes.len() as f64,
        "satisfied": satisfied,
        "total": outcomes.len(),
        "demands": outcomes,
    });
    write_output(out.or(cfg.output.as_deref()), &to_json(&doc))
}
