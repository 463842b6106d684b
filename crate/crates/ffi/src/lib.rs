//! C ABI for qsubnet.
//!
//! Every fallible function returns a [`QsnStatus`] and writes its result
//! through an out-pointer. On failure [`qsn_last_error`] describes the most
//! recent error on the calling thread. Handles are opaque and must be
//! released with their matching `*_free` function; strings returned by the
//! library are released with [`qsn_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qsubnet::costs::TaskThresholds;
use qsubnet::entanglement::{self, KeyRateParams};
use qsubnet::netmodel::{generate_random_subnetwork, Backbone, SubNetworkGraph, SubNetworkProfile};
use qsubnet::optimizer::{self, KktSolution, OptimizationProblem, Parameter, SolutionStatus};
use qsubnet::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsnStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument violated its documented range or format.
    InvalidArgument = 2,
    /// The thresholds cannot be met.
    Infeasible = 3,
    /// The solver did not reach its residual tolerance.
    SolverFailure = 4,
    /// Random graph generation gave up.
    GenerationFailure = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// Optimized quantity.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsnParameter {
    Fidelity = 0,
    Probability = 1,
}

/// Optimizer outcome flag.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsnSolutionStatus {
    Optimal = 0,
    BelowBare = 1,
    ClampedToBare = 2,
}

/// End-to-end fidelity and success probability.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsnPathParams {
    pub fidelity: f64,
    pub probability: f64,
}

/// Opaque sub-network graph.
pub struct QsnGraph(SubNetworkGraph);

/// Opaque optimization problem under construction.
pub struct QsnProblem {
    backbone: Backbone,
    thresholds: TaskThresholds,
    profiles: Vec<SubNetworkProfile>,
}

/// Opaque optimizer result.
pub struct QsnSolution(KktSolution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QsnStatus {
    match e {
        Error::Infeasible(_) => QsnStatus::Infeasible,
        Error::NoKktPoint { .. } | Error::NoBracket { .. } | Error::IterationLimit(_) => {
            QsnStatus::SolverFailure
        }
        Error::ResampleLimitExceeded(_) => QsnStatus::GenerationFailure,
        _ => QsnStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard<F>(f: F) -> QsnStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QsnStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            QsnStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            QsnStatus::Panic
        }
    }
}

fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller guarantees that a non-null `p` is valid for writes.
    unsafe { p.as_mut() }.ok_or(Failure::Null(what))
}

fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: the caller guarantees that a non-null `p` points to a live value.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

fn slice<'a>(data: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(Failure::Null("data"));
    }
    // SAFETY: the caller guarantees `len` readable doubles at `data`.
    Ok(unsafe { std::slice::from_raw_parts(data, len) })
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qsn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qsn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qsn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- entanglement calculus ----

/// Fidelity after swapping two isotropic pairs.
///
/// # Safety
/// `out_fidelity` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_swap_pair(f1: f64, f2: f64, out_fidelity: *mut f64) -> QsnStatus {
    guard(|| {
        *out(out_fidelity, "out_fidelity")? = entanglement::swap_pair(f1, f2)?;
        Ok(())
    })
}

/// Fidelity of a chain of `len` edges.
///
/// # Safety
/// `fidelities` must hold `len` doubles; `out_fidelity` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_chain_fidelity(
    fidelities: *const f64,
    len: usize,
    out_fidelity: *mut f64,
) -> QsnStatus {
    guard(|| {
        *out(out_fidelity, "out_fidelity")? = entanglement::chain_fidelity(slice(fidelities, len)?)?;
        Ok(())
    })
}

/// Success probability of a chain of `len` edges.
///
/// # Safety
/// `probabilities` must hold `len` doubles; `out_probability` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_chain_probability(
    probabilities: *const f64,
    len: usize,
    out_probability: *mut f64,
) -> QsnStatus {
    guard(|| {
        *out(out_probability, "out_probability")? =
            entanglement::chain_probability(slice(probabilities, len)?)?;
        Ok(())
    })
}

/// Parameters between two nodes whose gateway segments have fidelities
/// `f_l1`, `f_l2` and probabilities `eta_l1`, `eta_l2`, joined through a
/// backbone of fidelity `backbone_fidelity` and probability
/// `backbone_probability`.
///
/// # Safety
/// `out_params` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_end_to_end(
    f_l1: f64,
    f_l2: f64,
    eta_l1: f64,
    eta_l2: f64,
    backbone_fidelity: f64,
    backbone_probability: f64,
    out_params: *mut QsnPathParams,
) -> QsnStatus {
    guard(|| {
        let bb = Backbone::new(backbone_fidelity, backbone_probability)?;
        let p = entanglement::end_to_end_params(f_l1, f_l2, &bb, eta_l1, eta_l2)?;
        *out(out_params, "out_params")? = QsnPathParams {
            fidelity: p.fidelity,
            probability: p.probability,
        };
        Ok(())
    })
}

/// Binary entropy in bits.
///
/// # Safety
/// `out_entropy` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_binary_entropy(x: f64, out_entropy: *mut f64) -> QsnStatus {
    guard(|| {
        *out(out_entropy, "out_entropy")? = entanglement::binary_entropy(x)?;
        Ok(())
    })
}

/// Secure key rate in Hz.
///
/// # Safety
/// `out_rate` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_secure_key_rate(
    rep_rate: f64,
    path_probability: f64,
    fidelity: f64,
    out_rate: *mut f64,
) -> QsnStatus {
    guard(|| {
        let k = KeyRateParams::new(rep_rate, path_probability)?;
        *out(out_rate, "out_rate")? = entanglement::secure_key_rate(&k, fidelity)?;
        Ok(())
    })
}

// ---- graphs ----

/// Connected uniform random graph with `nodes` nodes and `edges` edges.
///
/// # Safety
/// `out_graph` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_graph_generate(
    nodes: usize,
    edges: usize,
    seed: u64,
    out_graph: *mut *mut QsnGraph,
) -> QsnStatus {
    guard(|| {
        let slot = out(out_graph, "out_graph")?;
        let g = generate_random_subnetwork(nodes, edges, seed)?;
        *slot = Box::into_raw(Box::new(QsnGraph(g)));
        Ok(())
    })
}

/// Parses a graph from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_graph` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_graph_from_json(json: *const c_char, out_graph: *mut *mut QsnGraph) -> QsnStatus {
    guard(|| {
        let slot = out(out_graph, "out_graph")?;
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Error::InvalidGraph(e.to_string()))?;
        let g: SubNetworkGraph =
            serde_json::from_str(text).map_err(|e| Error::InvalidGraph(e.to_string()))?;
        *slot = Box::into_raw(Box::new(QsnGraph(g)));
        Ok(())
    })
}

/// Canonical JSON of a graph; free with [`qsn_string_free`].
///
/// # Safety
/// `graph` must be a live handle; `out_json` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_graph_to_json(graph: *const QsnGraph, out_json: *mut *mut c_char) -> QsnStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        *out(out_json, "out_json")? = into_c_string(serde_json::to_string(&g.0).expect("graph serializes"));
        Ok(())
    })
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsn_graph_node_count(graph: *const QsnGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsn_graph_edge_count(graph: *const QsnGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Gateway node.
///
/// # Safety
/// `graph` must be a live handle; `out_node` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_graph_gateway(graph: *const QsnGraph, out_node: *mut usize) -> QsnStatus {
    guard(|| {
        *out(out_node, "out_node")? = borrow(graph, "graph")?.0.gateway();
        Ok(())
    })
}

/// Largest hop distance from any node to the gateway.
///
/// # Safety
/// `graph` must be a live handle; `out_hops` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_graph_gateway_eccentricity(graph: *const QsnGraph, out_hops: *mut usize) -> QsnStatus {
    guard(|| {
        *out(out_hops, "out_hops")? = borrow(graph, "graph")?.0.gateway_eccentricity();
        Ok(())
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `graph` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qsn_graph_free(graph: *mut QsnGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

// ---- optimization ----

/// Starts a problem with a backbone and fidelity/probability thresholds.
///
/// # Safety
/// `out_problem` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_problem_new(
    backbone_fidelity: f64,
    backbone_probability: f64,
    fidelity_threshold: f64,
    probability_threshold: f64,
    out_problem: *mut *mut QsnProblem,
) -> QsnStatus {
    guard(|| {
        let slot = out(out_problem, "out_problem")?;
        let p = QsnProblem {
            backbone: Backbone::new(backbone_fidelity, backbone_probability)?,
            thresholds: TaskThresholds::fidelity_probability(fidelity_threshold, probability_threshold)?,
            profiles: Vec::new(),
        };
        *slot = Box::into_raw(Box::new(p));
        Ok(())
    })
}

/// Appends a sub-network given by its edge count, gateway eccentricity and
/// bare generation probability.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsn_problem_add_network(
    problem: *mut QsnProblem,
    edge_count: usize,
    l_max: usize,
    eta_bare: f64,
) -> QsnStatus {
    guard(|| {
        let p = out(problem, "problem")?;
        p.profiles.push(SubNetworkProfile::new(edge_count, l_max, eta_bare)?);
        Ok(())
    })
}

/// Appends a sub-network described by a graph.
///
/// # Safety
/// `problem` and `graph` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn qsn_problem_add_graph(
    problem: *mut QsnProblem,
    graph: *const QsnGraph,
    eta_bare: f64,
) -> QsnStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        let p = out(problem, "problem")?;
        p.profiles.push(g.0.profile(eta_bare)?);
        Ok(())
    })
}

/// Solves for the cost-minimal average edge fidelity or probability.
///
/// # Safety
/// `problem` must be a live handle; `out_solution` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_problem_solve(
    problem: *const QsnProblem,
    parameter: QsnParameter,
    out_solution: *mut *mut QsnSolution,
) -> QsnStatus {
    guard(|| {
        let p = borrow(problem, "problem")?;
        let slot = out(out_solution, "out_solution")?;
        let op = OptimizationProblem::new(p.profiles.clone(), p.backbone, p.thresholds)?;
        let parameter = match parameter {
            QsnParameter::Fidelity => Parameter::Fidelity,
            QsnParameter::Probability => Parameter::Probability,
        };
        let s = optimizer::solve(&op, parameter)?;
        *slot = Box::into_raw(Box::new(QsnSolution(s)));
        Ok(())
    })
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qsn_problem_free(problem: *mut QsnProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of sub-networks, or 0 for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsn_solution_len(solution: *const QsnSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.values.len())
}

/// Optimal value for network `index`.
///
/// # Safety
/// `solution` must be a live handle; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_solution_value(
    solution: *const QsnSolution,
    index: usize,
    out_value: *mut f64,
) -> QsnStatus {
    guard(|| {
        let s = borrow(solution, "solution")?;
        let v = *s.0.values.get(index).ok_or(Error::OutOfRange {
            name: "network index",
            value: index as f64,
            range: "[0, len)",
        })?;
        *out(out_value, "out_value")? = v;
        Ok(())
    })
}

/// Multiplier of the constraint between networks `i` and `j`.
///
/// # Safety
/// `solution` must be a live handle; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_solution_multiplier(
    solution: *const QsnSolution,
    i: usize,
    j: usize,
    out_value: *mut f64,
) -> QsnStatus {
    guard(|| {
        let s = borrow(solution, "solution")?;
        let v = s.0.multiplier(i, j).ok_or(Error::OutOfRange {
            name: "network pair",
            value: i.max(j) as f64,
            range: "distinct indices below len",
        })?;
        *out(out_value, "out_value")? = v;
        Ok(())
    })
}

/// Total cost over all networks.
///
/// # Safety
/// `solution` must be a live handle; `out_cost` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_solution_total_cost(solution: *const QsnSolution, out_cost: *mut f64) -> QsnStatus {
    guard(|| {
        *out(out_cost, "out_cost")? = borrow(solution, "solution")?.0.total_cost;
        Ok(())
    })
}

/// Largest KKT residual.
///
/// # Safety
/// `solution` must be a live handle; `out_residual` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_solution_max_residual(
    solution: *const QsnSolution,
    out_residual: *mut f64,
) -> QsnStatus {
    guard(|| {
        *out(out_residual, "out_residual")? = borrow(solution, "solution")?.0.residuals.max();
        Ok(())
    })
}

/// Number of active pairwise constraints.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsn_solution_active_count(solution: *const QsnSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.active_set.len())
}

/// Outcome flag.
///
/// # Safety
/// `solution` must be a live handle; `out_status` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_solution_status(
    solution: *const QsnSolution,
    out_status: *mut QsnSolutionStatus,
) -> QsnStatus {
    guard(|| {
        let s = borrow(solution, "solution")?;
        *out(out_status, "out_status")? = match s.0.status {
            SolutionStatus::Optimal => QsnSolutionStatus::Optimal,
            SolutionStatus::BelowBare => QsnSolutionStatus::BelowBare,
            SolutionStatus::ClampedToBare => QsnSolutionStatus::ClampedToBare,
        };
        Ok(())
    })
}

/// Full solution as JSON; free with [`qsn_string_free`].
///
/// # Safety
/// `solution` must be a live handle; `out_json` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qsn_solution_to_json(solution: *const QsnSolution, out_json: *mut *mut c_char) -> QsnStatus {
    guard(|| {
        let s = borrow(solution, "solution")?;
        *out(out_json, "out_json")? = into_c_string(serde_json::to_string(&s.0).expect("solution serializes"));
        Ok(())
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qsn_solution_free(solution: *mut QsnSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}
