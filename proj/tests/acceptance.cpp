// Acceptance suite: every release gate in one binary, one verdict per line.
// Exits 0 only when every gate passes.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "horen/bench.hpp"
#include "horen/codebook.hpp"
#include "horen/geometry.hpp"
#include "horen/hopfield.hpp"
#include "horen/serialize.hpp"

using namespace horen;

namespace {

using Clock = std::chrono::steady_clock;

Scalar seconds_since(Clock::time_point t0) {
  return std::chrono::duration<Scalar>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

Verdict pass(std::string detail) { return {true, std::move(detail)}; }
Verdict fail(std::string detail) { return {false, std::move(detail)}; }

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

UnitVector random_unit(std::mt19937_64& rng, Index d) {
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  VectorX v(d);
  do {
    for (Index j = 0; j < d; ++j) {
      v[j] = gauss(rng);
    }
  } while (v.norm() < kZeroNormThreshold);
  return normalize(v);
}

struct Instance {
  RowMatrixX keys;
  UnitVector q0;
  Scalar beta;
};

Instance random_instance(std::mt19937_64& rng, int index, Index max_c,
                         Index max_d) {
  std::uniform_int_distribution<Index> count(1, max_c);
  std::uniform_int_distribution<Index> dimension(2, max_d);
  const Index c = count(rng);
  const Index d = dimension(rng);
  RowMatrixX keys(c, d);
  for (Index i = 0; i < c; ++i) {
    keys.row(i) = random_unit(rng, d).vec().transpose();
  }
  constexpr Scalar kBetas[3] = {1.0, 5.0, 20.0};
  return {std::move(keys), random_unit(rng, d), kBetas[index % 3]};
}

// Gate 1: every undamped update strictly pays for its step size in energy,
// per step and summed over the run.
Verdict criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  const int instances = 500;
  int violations = 0;
  Scalar worst = -std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < instances; ++i) {
    const Instance in = random_instance(rng, i, 64, 32);
    const IterationTrace trace =
        iterate_standard(in.keys, in.q0, in.beta, 100, 0.0);
    const DescentReport report = check_descent(trace);
    violations += (report.ok && report.cumulative_ok) ? 0 : 1;
    worst = std::max(worst, report.worst_margin);
  }
  const Scalar elapsed = seconds_since(t0);
  if (violations > 0 || elapsed >= 10.0) {
    return fail(fmt("%d of %d instances violated descent (%.1fs)", violations,
                    instances, elapsed));
  }
  return pass(fmt("%d instances, zero descent violations, worst margin "
                  "%.2e, %.1fs",
                  instances, worst, elapsed));
}

// Gate 2: the finite-step residual bound 2/sqrt(M) and the initial energy
// gap cap of 2 hold across horizons.
Verdict criterion_2() {
  std::mt19937_64 rng(202);
  const int instances = 500;
  int checked = 0;
  int violations = 0;
  Scalar worst_gap = 0.0;
  for (int i = 0; i < instances; ++i) {
    const Instance in = random_instance(rng, i, 64, 32);
    std::vector<int> horizons = {1, 4, 16, 100};
    if (i % 25 == 0) {
      horizons.push_back(10000);
    }
    for (const int m : horizons) {
      const IterationTrace trace =
          iterate_standard(in.keys, in.q0, in.beta, m, 0.0);
      const BoundReport report = check_residual_bound(trace);
      ++checked;
      violations += (report.ok && report.energy_gap_ok) ? 0 : 1;
      worst_gap = std::max(worst_gap, report.energy_gap);
    }
  }
  if (violations > 0) {
    return fail(fmt("%d of %d traces broke the residual bound", violations,
                    checked));
  }
  return pass(fmt("%d traces over horizons {1,4,16,100,10000}, zero bound "
                  "violations, max energy gap %.6f",
                  checked, worst_gap));
}

// Gate 3: the undamped iteration reaches a fixed point that is (numerically)
// a convex combination of the keys.
Verdict criterion_3() {
  std::mt19937_64 rng(303);
  const int instances = 500;
  int converged = 0;
  Scalar worst_hull = 0.0;
  for (int i = 0; i < instances; ++i) {
    const Instance in = random_instance(rng, i, 64, 32);
    const IterationTrace trace = iterate_standard(in.keys, in.q0, in.beta);
    if (!trace.stopped_early) {
      continue;
    }
    ++converged;
    const VectorX& fixed = trace.iterates.back();
    const Scalar hull_err =
        (fixed - standard_update(in.keys, fixed, in.beta)).norm();
    worst_hull = std::max(worst_hull, hull_err);
  }
  const Scalar frac = static_cast<Scalar>(converged) / instances;
  if (frac < 0.99) {
    return fail(fmt("only %.1f%% of instances converged", 100.0 * frac));
  }
  if (worst_hull > 1e-6) {
    return fail(fmt("worst hull reconstruction error %.2e > 1e-6",
                    worst_hull));
  }
  return pass(fmt("%.1f%% converged within 1e4 steps, worst hull error %.2e",
                  100.0 * frac, worst_hull));
}

// Gate 4: running to convergence drags unrelated queries into key basins far
// more often than one damped step does.
Verdict criterion_4() {
  RowMatrixX keys = RowMatrixX::Zero(8, 16);
  for (Index i = 0; i < 8; ++i) {
    keys(i, i) = 1.0;
  }
  const OverAttractionReport report =
      demonstrate_over_attraction(keys, 20.0, 1000, 0.85, 4242);
  const Scalar conv = report.converged_exceed_fraction;
  const Scalar damp = report.damped_exceed_fraction;
  const bool ok = conv > 0.0 && (damp == 0.0 || conv >= 10.0 * damp);
  if (!ok) {
    return fail(fmt("converged %.4f vs damped %.4f misses the 10x contrast",
                    conv, damp));
  }
  return pass(fmt("converged pull-in %.4f vs damped %.4f over %d queries",
                  conv, damp, report.queries));
}

// Gate 5: one damped step can displace a unit query by at most 4 gamma.
Verdict criterion_5() {
  std::mt19937_64 rng(505);
  const int instances = 100000;
  int violations = 0;
  Scalar worst_ratio = 0.0;
  HopfieldParams params;
  params.max_steps = 1;
  params.epsilon = 0.0;
  for (int i = 0; i < instances; ++i) {
    const Instance in = random_instance(rng, i, 32, 32);
    for (const Scalar gamma : {0.05, 0.1, 0.5}) {
      params.gamma = gamma;
      const RefineResult out = damped_refine(in.keys, in.q0, params);
      const Scalar moved = (out.query.vec() - in.q0.vec()).norm();
      violations += moved <= 4.0 * gamma + 1e-12 ? 0 : 1;
      worst_ratio = std::max(worst_ratio, moved / (4.0 * gamma));
    }
  }
  if (violations > 0) {
    return fail(fmt("%d displacement violations", violations));
  }
  return pass(fmt("%d single steps kept within 4*gamma, worst usage %.3f",
                  3 * instances, worst_ratio));
}

// Gate 6: routing verdicts ignore query magnitude; the euclidean rule cannot.
Verdict criterion_6() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<Scalar> unif(0.0, 1.0);
  HopfieldParams params;
  const AdaptorConfig adaptor;
  const int cases = 10000;
  int matched_cases = 0;
  int mismatches = 0;
  for (int i = 0; i < cases; ++i) {
    std::uniform_int_distribution<Index> count(1, 32);
    std::uniform_int_distribution<Index> dimension(2, 16);
    const Index c = count(rng);
    const Index d = dimension(rng);
    Codebook book(d);
    for (Index k = 0; k < c; ++k) {
      book.insert(random_unit(rng, d), Payload::cold(d),
                  "k" + std::to_string(k), static_cast<std::uint64_t>(k));
    }
    // Half the queries hug a stored key so both verdict branches are hit.
    VectorX raw;
    if (i % 2 == 0) {
      const Index j = std::uniform_int_distribution<Index>(0, c - 1)(rng);
      const VectorX k = book.entry(j).key.vec();
      VectorX g = random_unit(rng, d).vec();
      g -= dot(g, k) * k;
      const Scalar phi = 0.3 * unif(rng);
      raw = g.norm() < kZeroNormThreshold
                ? k
                : VectorX(std::cos(phi) * k +
                          std::sin(phi) * (g / g.norm()));
    } else {
      raw = random_unit(rng, d).vec();
    }
    raw *= 0.5 + unif(rng);
    const RoutingDecision base = route(book, raw, params);
    matched_cases += base.matched ? 1 : 0;
    for (const Scalar alpha : {0.01, 100.0}) {
      const RoutingDecision scaled = route(book, alpha * raw, params);
      mismatches += (scaled.matched == base.matched &&
                     scaled.best_index == base.best_index)
                        ? 0
                        : 1;
    }
  }
  if (mismatches > 0) {
    return fail(fmt("%d scale-dependent verdicts", mismatches));
  }
  if (matched_cases < 1000 || matched_cases > cases - 1000) {
    return fail(fmt("poor coverage: %d of %d cases matched", matched_cases,
                    cases));
  }
  // Distance matching with the same acceptance radius flips its verdict the
  // moment the very same direction is rescaled.
  const Scalar radius = std::sqrt(2.0 - 2.0 * params.threshold);
  const bool euclid_near = 0.0 <= radius;          // |e1 - 1 * e1|
  const bool euclid_far = 99.0 <= radius;          // |e1 - 100 * e1|
  if (!euclid_near || euclid_far) {
    return fail("distance baseline unexpectedly scale invariant");
  }
  return pass(fmt("%d cases verdict-stable across 1e-2..1e2 scaling "
                  "(%d matched); distance rule flips at alpha=100",
                  cases, matched_cases));
}

bench::StreamConfig ladder_stream_config() {
  bench::StreamConfig cfg;
  cfg.n_edits = 1000;
  cfg.dim = 64;
  cfg.paraphrase_angle = 0.25;
  cfg.magnitude_jitter = 1.0;
  cfg.seed = 42;
  return cfg;
}

HopfieldParams ladder_params() {
  HopfieldParams params;
  params.threshold = 0.98;
  return params;
}

// Gate 7: the full router beats cosine-only beats euclidean on paraphrase
// generalization, without giving up reliability or locality.
Verdict criterion_7() {
  const auto stream = bench::generate_stream(ladder_stream_config());
  const HopfieldParams params = ladder_params();
  const AdaptorConfig adaptor;
  const bench::MetricsReport horen =
      run_lifelong(stream, bench::RouterKind::horen, params, adaptor);
  const bench::MetricsReport cosine =
      run_lifelong(stream, bench::RouterKind::cosine_only, params, adaptor);
  const bench::MetricsReport euclid =
      run_lifelong(stream, bench::RouterKind::euclidean, params, adaptor);

  if (horen.generalization < cosine.generalization + 0.03 ||
      cosine.generalization < euclid.generalization + 0.03) {
    return fail(fmt("generalization ladder broke: %.4f / %.4f / %.4f",
                    horen.generalization, cosine.generalization,
                    euclid.generalization));
  }
  for (const bench::MetricsReport* r : {&horen, &cosine}) {
    if (r->reliability < 0.99 || r->locality < 0.98) {
      return fail(fmt("reliability %.4f or locality %.4f below gate",
                      r->reliability, r->locality));
    }
  }
  return pass(fmt("generalization %.4f > %.4f > %.4f with 0.03 margins; "
                  "reliability and locality hold",
                  horen.generalization, cosine.generalization,
                  euclid.generalization));
}

// Gate 8: dropping normalization costs at least 0.30 locality on the same
// stream.
Verdict criterion_8() {
  const auto stream = bench::generate_stream(ladder_stream_config());
  const HopfieldParams params = ladder_params();
  const AdaptorConfig adaptor;
  const bench::MetricsReport horen =
      run_lifelong(stream, bench::RouterKind::horen, params, adaptor);
  const bench::MetricsReport unnorm = run_lifelong(
      stream, bench::RouterKind::hopfield_unnormalized, params, adaptor);
  if (unnorm.locality > horen.locality - 0.30) {
    return fail(fmt("locality %.4f vs %.4f misses the 0.30 gap",
                    unnorm.locality, horen.locality));
  }
  return pass(fmt("locality %.4f normalized vs %.4f unnormalized",
                  horen.locality, unnorm.locality));
}

// Gate 9: with full-strength updates, one or two refinement steps are the
// sweet spot: step 1 buys generalization, more steps only bleed locality.
Verdict criterion_9() {
  HopfieldParams params = ladder_params();
  params.gamma = 1.0;
  const bench::SweepReport swept =
      bench::sweep(ladder_stream_config(), bench::RouterKind::horen, params,
                   AdaptorConfig{}, bench::SweepAxis::steps,
                   {0.0, 1.0, 2.0, 4.0, 8.0, 16.0});
  const auto& pts = swept.points;
  if (pts.size() != 6) {
    return fail("sweep did not produce six points");
  }
  if (pts[1].report.generalization <= pts[0].report.generalization) {
    return fail(fmt("one step did not help generalization: %.4f vs %.4f",
                    pts[1].report.generalization,
                    pts[0].report.generalization));
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].report.locality > pts[i - 1].report.locality + 1e-12) {
      return fail(fmt("locality rose from %.4f to %.4f at %g steps",
                      pts[i - 1].report.locality, pts[i].report.locality,
                      pts[i].value));
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].report.op > pts[best].report.op) {
      best = i;
    }
  }
  const Scalar best_steps = pts[best].value;
  if (best_steps != 1.0 && best_steps != 2.0) {
    return fail(fmt("best tradeoff at %g steps, expected 1 or 2", best_steps));
  }
  return pass(fmt("generalization %.4f -> %.4f at one step; locality "
                  "monotone; best tradeoff at %g steps",
                  pts[0].report.generalization, pts[1].report.generalization,
                  best_steps));
}

// Gate 10: the 50K-edit growth run stays healthy, linear in memory, and
// near-linear in match latency.
Verdict criterion_10() {
  bench::ScalingReport report;
  try {
    report = bench::scaling_stress(bench::ScalingConfig{});
  } catch (const ResourceBudgetExceededError& e) {
    return fail(fmt("budget exceeded: %s", e.what()));
  }
  if (report.total_seconds >= 1800.0) {
    return fail(fmt("run took %.0fs", report.total_seconds));
  }
  for (const bench::StressCheckpoint& c : report.checkpoints) {
    if (c.metrics.reliability < 0.90 || c.metrics.generalization < 0.90 ||
        c.metrics.locality < 0.90) {
      return fail(fmt("metrics sagged at checkpoint %llu",
                      static_cast<unsigned long long>(c.metrics.checkpoint)));
    }
  }
  // Parameter storage must sit on a line through the checkpoint sizes.
  const auto& cps = report.checkpoints;
  Scalar sx = 0.0;
  Scalar sy = 0.0;
  Scalar sxx = 0.0;
  Scalar sxy = 0.0;
  for (const bench::StressCheckpoint& c : cps) {
    const auto x = static_cast<Scalar>(c.metrics.checkpoint);
    const auto y = static_cast<Scalar>(c.parameter_count);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const auto n = static_cast<Scalar>(cps.size());
  const Scalar slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const Scalar intercept = (sy - slope * sx) / n;
  for (const bench::StressCheckpoint& c : cps) {
    const Scalar fitted =
        intercept + slope * static_cast<Scalar>(c.metrics.checkpoint);
    const Scalar relerr =
        std::abs(fitted - static_cast<Scalar>(c.parameter_count)) /
        static_cast<Scalar>(c.parameter_count);
    if (relerr > 0.05) {
      return fail(fmt("parameter count off the line by %.1f%%",
                      100.0 * relerr));
    }
  }
  if (report.latency_fit_r2 < 0.95) {
    return fail(fmt("latency fit r2 %.4f < 0.95", report.latency_fit_r2));
  }
  if (report.latency_ratio_50k_25k < 1.7 ||
      report.latency_ratio_50k_25k > 2.3) {
    return fail(fmt("latency ratio %.3f outside [1.7, 2.3]",
                    report.latency_ratio_50k_25k));
  }
  return pass(fmt("%llu entries in %.0fs, metrics >= 0.90, params linear, "
                  "latency r2 %.4f, 50K/25K ratio %.2f",
                  static_cast<unsigned long long>(report.final_entries),
                  report.total_seconds, report.latency_fit_r2,
                  report.latency_ratio_50k_25k));
}

// Gate 11: the three-way edit policy, with key immutability and one creation
// index per edit.
Verdict criterion_11() {
  Codebook book(4);
  const HopfieldParams params;
  const AdaptorConfig adaptor;
  VectorX raw = VectorX::Zero(4);
  raw[0] = 2.0;
  VectorX t1 = VectorX::Zero(4);
  t1[1] = 1.0;
  VectorX t2 = VectorX::Zero(4);
  t2[2] = 1.0;

  const EditOutcome first =
      apply_edit(book, raw, EditTarget{"f", t1}, params, adaptor);
  if (first.action != EditAction::Inserted || book.size() != 1 ||
      book.entry(0).created_at != 0) {
    return fail("fresh edit did not insert at creation index 0");
  }
  const VectorX key_before = book.entry(0).key.vec();
  const Scalar loss_before = book.entry(0).payload.final_loss;

  const EditOutcome second =
      apply_edit(book, raw, EditTarget{"f", t1}, params, adaptor);
  if (second.action != EditAction::Refined || book.size() != 1) {
    return fail("matching edit with the same label did not refine in place");
  }
  if ((book.entry(0).key.vec() - key_before).norm() != 0.0) {
    return fail("refinement moved the stored key");
  }
  if (book.entry(0).payload.final_loss > loss_before) {
    return fail("refinement did not improve the payload");
  }

  const EditOutcome third =
      apply_edit(book, raw, EditTarget{"g", t2}, params, adaptor);
  if (third.action != EditAction::ConflictInserted || book.size() != 2) {
    return fail("conflicting edit did not insert a second entry");
  }
  if ((book.entry(0).key.vec() - key_before).norm() != 0.0 ||
      book.entry(0).label != "f") {
    return fail("conflicting edit disturbed the original entry");
  }
  if (book.entry(1).created_at != 2 || book.edits_seen() != 3) {
    return fail("creation indices did not advance one per edit");
  }
  return pass("insert / refine / conflict-insert with immutable keys and "
              "creation indices 0,1,2");
}

// Gate 12: a 10K-entry book survives a save/load round trip with identical
// routing, and corrupt files are rejected.
Verdict criterion_12() {
  bench::StreamConfig cfg;
  cfg.n_edits = 10000;
  cfg.dim = 32;
  cfg.seed = 77;
  const auto stream = bench::generate_stream(cfg);
  const HopfieldParams params;
  const AdaptorConfig adaptor;
  Codebook book(cfg.dim);
  for (const bench::EditSample& s : stream) {
    apply_edit(book, s.edit_query, s.target, params, adaptor);
  }

  namespace fs = std::filesystem;
  const fs::path file =
      fs::temp_directory_path() / "horen_acceptance_book.horen";
  save_codebook(book, file);
  const Codebook loaded = load_codebook(file);
  if (loaded.size() != book.size() || loaded.dim() != book.dim()) {
    return fail("reloaded book has a different shape");
  }
  std::mt19937_64 rng(1212);
  int disagreements = 0;
  for (int i = 0; i < 1000; ++i) {
    const UnitVector q = random_unit(rng, cfg.dim);
    const RoutingDecision a = match(book, q, params.threshold);
    const RoutingDecision b = match(loaded, q, params.threshold);
    disagreements += (a.matched == b.matched && a.best_index == b.best_index &&
                      a.best_score == b.best_score)
                         ? 0
                         : 1;
  }
  std::string bytes;
  {
    std::ostringstream out(std::ios::binary);
    save_codebook(book, out);
    bytes = out.str();
  }
  fs::remove(file);
  if (disagreements > 0) {
    return fail(fmt("%d routing disagreements after reload", disagreements));
  }

  int rejected = 0;
  try {
    std::istringstream in(bytes.substr(0, bytes.size() / 2),
                          std::ios::binary);
    load_codebook(in);
  } catch (const FormatError&) {
    ++rejected;
  }
  try {
    std::string flipped = bytes;
    flipped[0] = 'X';
    std::istringstream in(flipped, std::ios::binary);
    load_codebook(in);
  } catch (const FormatError&) {
    ++rejected;
  }
  if (rejected != 2) {
    return fail("a corrupt file loaded without an error");
  }
  return pass(fmt("%llu entries round trip with identical routing on 1000 "
                  "queries; truncated and corrupted files rejected",
                  static_cast<unsigned long long>(book.size())));
}

}  // namespace

int main() {
  const std::pair<int, std::function<Verdict()>> criteria[] = {
      {1, criterion_1},   {2, criterion_2},   {3, criterion_3},
      {4, criterion_4},   {5, criterion_5},   {6, criterion_6},
      {7, criterion_7},   {8, criterion_8},   {9, criterion_9},
      {10, criterion_10}, {11, criterion_11}, {12, criterion_12},
  };
  int failed = 0;
  for (const auto& [number, check] : criteria) {
    Verdict verdict;
    try {
      verdict = check();
    } catch (const std::exception& e) {
      verdict = fail(fmt("unexpected error: %s", e.what()));
    }
    std::printf("criterion %2d %s — %s\n", number,
                verdict.pass ? "PASS" : "FAIL", verdict.detail.c_str());
    std::fflush(stdout);
    failed += verdict.pass ? 0 : 1;
  }
  std::printf("%d/12 criteria passed\n", 12 - failed);
  return failed == 0 ? 0 : 1;
}
