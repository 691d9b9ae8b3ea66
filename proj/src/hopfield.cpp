#include "horen/hopfield.hpp"

#include <cmath>
#include <random>

namespace horen {

void HopfieldParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InvalidConfigError("beta must be finite and > 0");
  }
  if (!(gamma > 0.0) || !(gamma <= 1.0)) {
    throw InvalidConfigError("gamma must lie in (0, 1]");
  }
  if (max_steps < 0) {
    throw InvalidConfigError("max_steps must be >= 0");
  }
  if (!(epsilon >= 0.0)) {
    throw InvalidConfigError("epsilon must be >= 0");
  }
  if (!(threshold > -1.0) || !(threshold < 1.0)) {
    throw InvalidConfigError("threshold must lie in (-1, 1)");
  }
}

namespace {

void check_key_query(KeyMatrixRef keys, const VectorX& q) {
  if (keys.rows() == 0) {
    throw EmptyInputError("no keys");
  }
  if (keys.cols() != q.size()) {
    throw DimensionMismatchError("keys are " + std::to_string(keys.cols()) +
                                 "-dimensional, query is " +
                                 std::to_string(q.size()));
  }
}

Scalar energy_from_scores(const VectorX& scores, const VectorX& q,
                          Scalar beta) {
  return 0.5 * q.squaredNorm() - lse(scores, beta);
}

}  // namespace

VectorX standard_update(KeyMatrixRef keys, const VectorX& q, Scalar beta) {
  check_key_query(keys, q);
  const VectorX scores = keys * q;
  const VectorX p = softmax(scores, beta);
  return keys.transpose() * p;
}

Scalar energy(KeyMatrixRef keys, const VectorX& q, Scalar beta) {
  check_key_query(keys, q);
  const VectorX scores = keys * q;
  return energy_from_scores(scores, q, beta);
}

namespace detail {

LeanRefine refine_lean(KeyMatrixRef keys, const VectorX& q0,
                       const HopfieldParams& params) {
  LeanRefine out{q0, 0, false};
  if (params.max_steps == 0) {
    return out;
  }
  check_key_query(keys, q0);
  VectorX& q = out.q;
  VectorX scores(keys.rows());
  VectorX cand(q.size());
  for (int m = 0; m < params.max_steps; ++m) {
    scores.noalias() = keys * q;
    const VectorX p = softmax(scores, params.beta);
    cand.noalias() = keys.transpose() * p;
    const Scalar cand_norm = cand.norm();
    if (cand_norm < kZeroNormThreshold) {
      out.degenerate = true;
      break;
    }
    cand /= cand_norm;
    if ((cand - q).norm() <= params.epsilon) {
      break;
    }
    cand = (1.0 - params.gamma) * q + params.gamma * cand;
    const Scalar mix_norm = cand.norm();
    if (mix_norm < kZeroNormThreshold) {
      out.degenerate = true;
      break;
    }
    q = cand / mix_norm;
    ++out.steps_taken;
  }
  return out;
}

}  // namespace detail

RefineResult damped_refine(KeyMatrixRef keys, const UnitVector& q0,
                           const HopfieldParams& params) {
  params.validate();
  IterationTrace trace;
  trace.beta = params.beta;
  trace.num_keys = keys.rows();
  trace.iterates.push_back(q0.vec());
  if (params.max_steps == 0) {
    trace.energies.push_back(energy(keys, q0.vec(), params.beta));
    trace.residuals.push_back(0.0);
    return RefineResult{q0, std::move(trace)};
  }
  check_key_query(keys, q0.vec());

  VectorX q = q0.vec();
  bool last_has_record = false;
  for (int m = 0; m < params.max_steps; ++m) {
    const VectorX scores = keys * q;
    trace.energies.push_back(energy_from_scores(scores, q, params.beta));
    const VectorX p = softmax(scores, params.beta);
    VectorX cand = keys.transpose() * p;
    const Scalar cand_norm = cand.norm();
    if (cand_norm < kZeroNormThreshold) {
      // The readout cancels to nothing; there is no direction to move in.
      trace.residuals.push_back(0.0);
      trace.degenerate = true;
      last_has_record = true;
      break;
    }
    cand /= cand_norm;
    const Scalar res = (cand - q).norm();
    trace.residuals.push_back(res);
    if (res <= params.epsilon) {
      trace.stopped_early = true;
      last_has_record = true;
      break;
    }
    VectorX mix = (1.0 - params.gamma) * q + params.gamma * cand;
    const Scalar mix_norm = mix.norm();
    if (mix_norm < kZeroNormThreshold) {
      trace.degenerate = true;
      last_has_record = true;
      break;
    }
    q = mix / mix_norm;
    ++trace.steps_taken;
    trace.iterates.push_back(q);
  }
  if (!last_has_record) {
    // Budget exhausted right after a move: evaluate the final iterate so the
    // trace stays aligned (one energy and one residual per iterate).
    const VectorX scores = keys * q;
    trace.energies.push_back(energy_from_scores(scores, q, params.beta));
    const VectorX p = softmax(scores, params.beta);
    VectorX cand = keys.transpose() * p;
    const Scalar cand_norm = cand.norm();
    if (cand_norm < kZeroNormThreshold) {
      trace.residuals.push_back(0.0);
      trace.degenerate = true;
    } else {
      cand /= cand_norm;
      trace.residuals.push_back((cand - q).norm());
    }
  }
  return RefineResult{UnitVector::from_unit(q), std::move(trace)};
}

IterationTrace iterate_standard(KeyMatrixRef keys, const UnitVector& q0,
                                Scalar beta, int max_steps, Scalar tol) {
  check_key_query(keys, q0.vec());
  if (max_steps < 0) {
    throw InvalidConfigError("max_steps must be >= 0");
  }
  IterationTrace trace;
  trace.beta = beta;
  trace.num_keys = keys.rows();
  VectorX q = q0.vec();
  trace.iterates.push_back(q);
  trace.energies.push_back(energy(keys, q, beta));
  for (int s = 0; s < max_steps; ++s) {
    const VectorX next = standard_update(keys, q, beta);
    const Scalar res = (next - q).norm();
    trace.residuals.push_back(res);
    if (res <= tol) {
      trace.stopped_early = true;
      return trace;
    }
    q = next;
    ++trace.steps_taken;
    trace.iterates.push_back(q);
    trace.energies.push_back(energy(keys, q, beta));
  }
  // Budget exhausted: evaluate the residual at the last iterate as well.
  trace.residuals.push_back((standard_update(keys, q, beta) - q).norm());
  return trace;
}

DescentReport check_descent(const IterationTrace& trace) {
  DescentReport report;
  const auto n = trace.iterates.size();
  if (n < 1 || trace.energies.size() != n) {
    return report;
  }
  constexpr Scalar kStepSlack = 1e-9;
  constexpr Scalar kSumSlack = 1e-8;
  bool per_step_ok = true;
  for (std::size_t s = 0; s + 1 < n; ++s) {
    const Scalar step_sq =
        (trace.iterates[s + 1] - trace.iterates[s]).squaredNorm();
    const Scalar margin =
        trace.energies[s + 1] - trace.energies[s] + 0.5 * step_sq;
    report.step_norm_sum += step_sq;
    // Written so that a NaN margin both sticks and fails the check.
    if (s == 0 || !(margin <= report.worst_margin)) {
      report.worst_margin = margin;
    }
    if (!(margin <= kStepSlack)) {
      per_step_ok = false;
    }
    ++report.pairs_checked;
  }
  report.energy_drop = trace.energies.front() - trace.energies.back();
  report.cumulative_ok =
      report.step_norm_sum <= 2.0 * report.energy_drop + kSumSlack;
  report.ok = per_step_ok && report.cumulative_ok;
  return report;
}

BoundReport check_residual_bound(const IterationTrace& trace) {
  BoundReport report;
  report.steps = trace.steps_taken;
  if (report.steps < 1 || trace.residuals.empty()) {
    return report;
  }
  // Minimum over the residuals measured at iterates 0 .. M-1.
  Scalar min_res = trace.residuals[0];
  const int limit = std::min<int>(report.steps, trace.residuals.size());
  for (int s = 1; s < limit; ++s) {
    min_res = std::min(min_res, trace.residuals[s]);
  }
  report.min_residual = min_res;
  report.bound = 2.0 / std::sqrt(static_cast<Scalar>(report.steps));
  const Scalar floor =
      -0.5 - std::log(static_cast<Scalar>(trace.num_keys)) / trace.beta;
  report.energy_gap = trace.energies.front() - floor;
  report.energy_gap_ok = report.energy_gap <= 2.0 + 1e-9;
  report.ok = (min_res <= report.bound) && report.energy_gap_ok;
  return report;
}

OverAttractionReport demonstrate_over_attraction(KeyMatrixRef keys,
                                                 Scalar beta, int n_queries,
                                                 Scalar threshold,
                                                 std::uint64_t seed,
                                                 Scalar gamma) {
  if (keys.rows() == 0) {
    throw EmptyInputError("no keys");
  }
  OverAttractionReport report;
  report.queries = n_queries;
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  HopfieldParams damped;
  damped.beta = beta;
  damped.gamma = gamma;
  damped.max_steps = 1;
  damped.threshold = threshold;

  int converged_exceed = 0;
  int damped_exceed = 0;
  VectorX x(keys.cols());
  for (int i = 0; i < n_queries; ++i) {
    for (Index j = 0; j < x.size(); ++j) {
      x[j] = gauss(rng);
    }
    const UnitVector q0 = normalize(x);

    const IterationTrace trace = iterate_standard(keys, q0, beta);
    const VectorX& fp = trace.iterates.back();
    const Scalar fp_norm = fp.norm();
    if (fp_norm >= kZeroNormThreshold) {
      const Scalar best = (keys * (fp / fp_norm)).maxCoeff();
      if (best > threshold) {
        ++converged_exceed;
      }
    }

    const detail::LeanRefine one = detail::refine_lean(keys, q0.vec(), damped);
    if ((keys * one.q).maxCoeff() > threshold) {
      ++damped_exceed;
    }
  }
  report.converged_exceed_fraction =
      static_cast<Scalar>(converged_exceed) / n_queries;
  report.damped_exceed_fraction =
      static_cast<Scalar>(damped_exceed) / n_queries;
  return report;
}

}  // namespace horen
