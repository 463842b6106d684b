#ifndef QSUBNET_H
#define QSUBNET_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Optimized quantity.
 */
typedef enum QsnParameter {
  QSN_PARAMETER_FIDELITY = 0,
  QSN_PARAMETER_PROBABILITY = 1,
} QsnParameter;

/**
 * Optimizer outcome flag.
 */
typedef enum QsnSolutionStatus {
  QSN_SOLUTION_STATUS_OPTIMAL = 0,
  QSN_SOLUTION_STATUS_BELOW_BARE = 1,
  QSN_SOLUTION_STATUS_CLAMPED_TO_BARE = 2,
} QsnSolutionStatus;

/**
 * Result code of every fallible call.
 */
typedef enum QsnStatus {
  QSN_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  QSN_STATUS_NULL_POINTER = 1,
  /**
   * An argument violated its documented range or format.
   */
  QSN_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The thresholds cannot be met.
   */
  QSN_STATUS_INFEASIBLE = 3,
  /**
   * The solver did not reach its residual tolerance.
   */
  QSN_STATUS_SOLVER_FAILURE = 4,
  /**
   * Random graph generation gave up.
   */
  QSN_STATUS_GENERATION_FAILURE = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  QSN_STATUS_PANIC = 6,
} QsnStatus;

/**
 * Opaque sub-network graph.
 */
typedef struct QsnGraph QsnGraph;

/**
 * Opaque optimization problem under construction.
 */
typedef struct QsnProblem QsnProblem;

/**
 * Opaque optimizer result.
 */
typedef struct QsnSolution QsnSolution;

/**
 * End-to-end fidelity and success probability.
 */
typedef struct QsnPathParams {
  double fidelity;
  double probability;
} QsnPathParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *qsn_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qsn_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void qsn_string_free(char *s);

/**
 * Fidelity after swapping two isotropic pairs.
 *
 * # Safety
 * `out_fidelity` must be valid for writes.
 */
enum QsnStatus qsn_swap_pair(double f1, double f2, double *out_fidelity);

/**
 * Fidelity of a chain of `len` edges.
 *
 * # Safety
 * `fidelities` must hold `len` doubles; `out_fidelity` must be valid for writes.
 */
enum QsnStatus qsn_chain_fidelity(const double *fidelities, size_t len, double *out_fidelity);

/**
 * Success probability of a chain of `len` edges.
 *
 * # Safety
 * `probabilities` must hold `len` doubles; `out_probability` must be valid
 * for writes.
 */
enum QsnStatus qsn_chain_probability(const double *probabilities,
                                     size_t len,
                                     double *out_probability);

/**
 * Parameters between two nodes whose gateway segments have fidelities
 * `f_l1`, `f_l2` and probabilities `eta_l1`, `eta_l2`, joined through a
 * backbone of fidelity `backbone_fidelity` and probability
 * `backbone_probability`.
 *
 * # Safety
 * `out_params` must be valid for writes.
 */
enum QsnStatus qsn_end_to_end(double f_l1,
                              double f_l2,
                              double eta_l1,
                              double eta_l2,
                              double backbone_fidelity,
                              double backbone_probability,
                              struct QsnPathParams *out_params);

/**
 * Binary entropy in bits.
 *
 * # Safety
 * `out_entropy` must be valid for writes.
 */
enum QsnStatus qsn_binary_entropy(double x, double *out_entropy);

/**
 * Secure key rate in Hz.
 *
 * # Safety
 * `out_rate` must be valid for writes.
 */
enum QsnStatus qsn_secure_key_rate(double rep_rate,
                                   double path_probability,
                                   double fidelity,
                                   double *out_rate);

/**
 * Connected uniform random graph with `nodes` nodes and `edges` edges.
 *
 * # Safety
 * `out_graph` must be valid for writes.
 */
enum QsnStatus qsn_graph_generate(size_t nodes,
                                  size_t edges,
                                  uint64_t seed,
                                  struct QsnGraph **out_graph);

/**
 * Parses a graph from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out_graph` must be valid for writes.
 */
enum QsnStatus qsn_graph_from_json(const char *json, struct QsnGraph **out_graph);

/**
 * Canonical JSON of a graph; free with [`qsn_string_free`].
 *
 * # Safety
 * `graph` must be a live handle; `out_json` must be valid for writes.
 */
enum QsnStatus qsn_graph_to_json(const struct QsnGraph *graph, char **out_json);

/**
 * Node count, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t qsn_graph_node_count(const struct QsnGraph *graph);

/**
 * Edge count, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t qsn_graph_edge_count(const struct QsnGraph *graph);

/**
 * Gateway node.
 *
 * # Safety
 * `graph` must be a live handle; `out_node` must be valid for writes.
 */
enum QsnStatus qsn_graph_gateway(const struct QsnGraph *graph, size_t *out_node);

/**
 * Largest hop distance from any node to the gateway.
 *
 * # Safety
 * `graph` must be a live handle; `out_hops` must be valid for writes.
 */
enum QsnStatus qsn_graph_gateway_eccentricity(const struct QsnGraph *graph, size_t *out_hops);

/**
 * Releases a graph. Null is ignored.
 *
 * # Safety
 * `graph` must come from this library and not be freed twice.
 */
void qsn_graph_free(struct QsnGraph *graph);

/**
 * Starts a problem with a backbone and fidelity/probability thresholds.
 *
 * # Safety
 * `out_problem` must be valid for writes.
 */
enum QsnStatus qsn_problem_new(double backbone_fidelity,
                               double backbone_probability,
                               double fidelity_threshold,
                               double probability_threshold,
                               struct QsnProblem **out_problem);

/**
 * Appends a sub-network given by its edge count, gateway eccentricity and
 * bare generation probability.
 *
 * # Safety
 * `problem` must be a live handle.
 */
enum QsnStatus qsn_problem_add_network(struct QsnProblem *problem,
                                       size_t edge_count,
                                       size_t l_max,
                                       double eta_bare);

/**
 * Appends a sub-network described by a graph.
 *
 * # Safety
 * `problem` and `graph` must be live handles.
 */
enum QsnStatus qsn_problem_add_graph(struct QsnProblem *problem,
                                     const struct QsnGraph *graph,
                                     double eta_bare);

/**
 * Solves for the cost-minimal average edge fidelity or probability.
 *
 * # Safety
 * `problem` must be a live handle; `out_solution` must be valid for writes.
 */
enum QsnStatus qsn_problem_solve(const struct QsnProblem *problem,
                                 enum QsnParameter parameter,
                                 struct QsnSolution **out_solution);

/**
 * Releases a problem. Null is ignored.
 *
 * # Safety
 * `problem` must come from this library and not be freed twice.
 */
void qsn_problem_free(struct QsnProblem *problem);

/**
 * Number of sub-networks, or 0 for a null handle.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
size_t qsn_solution_len(const struct QsnSolution *solution);

/**
 * Optimal value for network `index`.
 *
 * # Safety
 * `solution` must be a live handle; `out_value` must be valid for writes.
 */
enum QsnStatus qsn_solution_value(const struct QsnSolution *solution,
                                  size_t index,
                                  double *out_value);

/**
 * Multiplier of the constraint between networks `i` and `j`.
 *
 * # Safety
 * `solution` must be a live handle; `out_value` must be valid for writes.
 */
enum QsnStatus qsn_solution_multiplier(const struct QsnSolution *solution,
                                       size_t i,
                                       size_t j,
                                       double *out_value);

/**
 * Total cost over all networks.
 *
 * # Safety
 * `solution` must be a live handle; `out_cost` must be valid for writes.
 */
enum QsnStatus qsn_solution_total_cost(const struct QsnSolution *solution, double *out_cost);

/**
 * Largest KKT residual.
 *
 * # Safety
 * `solution` must be a live handle; `out_residual` must be valid for writes.
 */
enum QsnStatus qsn_solution_max_residual(const struct QsnSolution *solution, double *out_residual);

/**
 * Number of active pairwise constraints.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
size_t qsn_solution_active_count(const struct QsnSolution *solution);

/**
 * Outcome flag.
 *
 * # Safety
 * `solution` must be a live handle; `out_status` must be valid for writes.
 */
enum QsnStatus qsn_solution_status(const struct QsnSolution *solution,
                                   enum QsnSolutionStatus *out_status);

/**
 * Full solution as JSON; free with [`qsn_string_free`].
 *
 * # Safety
 * `solution` must be a live handle; `out_json` must be valid for writes.
 */
enum QsnStatus qsn_solution_to_json(const struct QsnSolution *solution, char **out_json);

/**
 * Releases a solution. Null is ignored.
 *
 * # Safety
 * `solution` must come from this library and not be freed twice.
 */
void qsn_solution_free(struct QsnSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSUBNET_H */
