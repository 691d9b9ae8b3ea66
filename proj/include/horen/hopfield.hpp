#pragma once

#include <cstdint>
#include <vector>

#include "horen/geometry.hpp"
#include "horen/types.hpp"

namespace horen {

using KeyMatrixRef = Eigen::Ref<const RowMatrixX>;

/// Knobs of the damped refinement loop.
struct HopfieldParams {
  Scalar beta = 20.0;     // inverse temperature, > 0
  Scalar gamma = 0.1;     // damping weight on the update direction, in (0, 1]
  int max_steps = 1;      // refinement steps M, >= 0 (0 = no refinement)
  Scalar epsilon = 1e-4;  // early-stop threshold on the step residual, >= 0
  Scalar threshold = 0.85;  // match acceptance bound c, in (-1, 1)

  void validate() const;
};

/// Record of one refinement or fixed-point run. iterates, energies and
/// residuals are aligned: entry s describes the s-th iterate, its energy,
/// and the distance to the next update proposed from it.
struct IterationTrace {
  std::vector<VectorX> iterates;
  std::vector<Scalar> energies;
  std::vector<Scalar> residuals;
  int steps_taken = 0;
  bool stopped_early = false;
  // Set when an update direction had no usable norm; the query was returned
  // unchanged from that point on.
  bool degenerate = false;
  // Context the bound checks need.
  Scalar beta = 0.0;
  Index num_keys = 0;
};

/// One full attention readout: softmax(beta * K q) recombined over the keys.
VectorX standard_update(KeyMatrixRef keys, const VectorX& q, Scalar beta);

/// E(q) = 0.5 ||q||^2 - lse_beta(K q). Decreases along standard_update steps
/// and is bounded below by -0.5 - log(C)/beta when q and the keys are unit.
Scalar energy(KeyMatrixRef keys, const VectorX& q, Scalar beta);

struct RefineResult {
  UnitVector query;
  IterationTrace trace;
};

/// Damped, renormalized refinement: up to max_steps rounds of
///   p = softmax(beta * K q); candidate = normalize(K^T p);
///   stop if ||candidate - q|| <= epsilon;
///   q = normalize((1 - gamma) q + gamma * candidate).
/// The stop test runs before the mix, so a converged query is not moved.
/// Degenerate directions (candidate or mix with norm below the zero
/// threshold) leave q unchanged and flag the trace instead of throwing.
/// max_steps = 0 returns q0 untouched. Every returned iterate is unit-norm.
RefineResult damped_refine(KeyMatrixRef keys, const UnitVector& q0,
                           const HopfieldParams& params);

/// Undamped fixed-point iteration q <- standard_update(q), recording the full
/// trace. Stops when the step residual reaches tol or after max_steps.
/// A diagnostic routine: the routing path never calls it.
IterationTrace iterate_standard(KeyMatrixRef keys, const UnitVector& q0,
                                Scalar beta, int max_steps = 10000,
                                Scalar tol = 1e-8);

/// Per-step energy descent over a standard-update trace:
///   E(q^{s+1}) - E(q^s) <= -0.5 ||q^{s+1} - q^s||^2   (slack 1e-9)
/// plus the summed form  sum_s ||dq_s||^2 <= 2 (E_0 - E_last)  (slack 1e-8).
struct DescentReport {
  bool ok = false;
  int pairs_checked = 0;
  // Most positive value of E_{s+1} - E_s + 0.5||dq||^2 (> 0 means violation).
  Scalar worst_margin = 0.0;
  Scalar step_norm_sum = 0.0;  // sum of squared step norms
  Scalar energy_drop = 0.0;    // E_0 - E_last
  bool cumulative_ok = false;
};
DescentReport check_descent(const IterationTrace& trace);

/// Finite-step residual bound over a standard-update trace of M steps:
///   min_{s < M} ||q^{s+1} - q^s|| <= 2 / sqrt(M),
/// via the initial energy gap E_0 - (-0.5 - log(C)/beta) <= 2 for unit
/// queries and keys.
struct BoundReport {
  bool ok = false;
  int steps = 0;
  Scalar min_residual = 0.0;
  Scalar bound = 0.0;
  Scalar energy_gap = 0.0;  // E_0 - E_floor
  bool energy_gap_ok = false;
};
BoundReport check_residual_bound(const IterationTrace& trace);

/// Contrast between running the undamped iteration to convergence and taking
/// a single damped step, from unrelated unit queries: the fraction whose
/// (renormalized) endpoint lands within the acceptance cosine of some key.
struct OverAttractionReport {
  int queries = 0;
  Scalar converged_exceed_fraction = 0.0;
  Scalar damped_exceed_fraction = 0.0;
};
OverAttractionReport demonstrate_over_attraction(KeyMatrixRef keys,
                                                 Scalar beta, int n_queries,
                                                 Scalar threshold,
                                                 std::uint64_t seed,
                                                 Scalar gamma = 0.1);

namespace detail {

/// Trace-free variant of damped_refine for hot paths. Same update rule and
/// stop conditions; q0 must be unit-norm.
struct LeanRefine {
  VectorX q;
  int steps_taken = 0;
  bool degenerate = false;
};
LeanRefine refine_lean(KeyMatrixRef keys, const VectorX& q0,
                       const HopfieldParams& params);

}  // namespace detail

}  // namespace horen
