#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "horen/adaptor.hpp"
#include "horen/codebook.hpp"
#include "horen/hopfield.hpp"
#include "horen/types.hpp"

namespace horen::bench {

/// Synthetic lifelong-editing stream settings. Angles are radians.
struct StreamConfig {
  std::uint64_t n_edits = 100;
  Index dim = 64;
  // Paraphrases are the edit direction rotated by a uniform angle in
  // [0, paraphrase_angle] along a random tangent.
  Scalar paraphrase_angle = 0.25;
  // Unrelated queries are uniform on the sphere by default; hard_locality
  // places them at exactly locality_angle from a random edit direction.
  bool hard_locality = false;
  Scalar locality_angle = 0.0;  // 0 resolves to 2 * paraphrase_angle
  std::uint64_t seed = 42;
  // Every emitted query is scaled by an independent factor drawn uniformly
  // from [1, 1 + magnitude_jitter].
  Scalar magnitude_jitter = 0.0;
  // Fractions of later edits that replay an earlier edit: same label and
  // target (exercising payload refinement) or a fresh conflicting label.
  Scalar reassert_fraction = 0.0;
  Scalar conflict_fraction = 0.0;

  void validate() const;
  Scalar resolved_locality_angle() const {
    return locality_angle > 0.0 ? locality_angle : 2.0 * paraphrase_angle;
  }
};

/// One edit plus its two probe queries.
struct EditSample {
  VectorX edit_query;        // raw query the edit arrives with
  VectorX paraphrase_query;  // same fact, rotated and rescaled
  VectorX locality_query;    // unrelated fact; must not match
  EditTarget target;         // label and target value for the payload
  std::uint64_t index = 0;
};

/// Deterministic in cfg.seed: equal configs give bit-identical streams.
std::vector<EditSample> generate_stream(const StreamConfig& cfg);

/// Routing variants under test. horen is the full normalized damped router;
/// cosine_only drops refinement; euclidean stores raw keys and matches by
/// distance within sqrt(2 - 2c); hopfield_unnormalized refines and scores
/// raw vectors with no normalization anywhere.
enum class RouterKind { horen, cosine_only, euclidean, hopfield_unnormalized };

std::optional<RouterKind> router_from_string(std::string_view s);
std::string to_string(RouterKind kind);

struct CheckpointMetrics {
  std::uint64_t checkpoint = 0;
  Scalar reliability = 0.0;
  Scalar generalization = 0.0;
  Scalar locality = 0.0;
  Scalar op = 0.0;  // geometric mean of the three
  Scalar mean_locality_displacement = 0.0;
};

struct MetricsReport {
  // Metrics at the last checkpoint.
  Scalar reliability = 0.0;
  Scalar generalization = 0.0;
  Scalar locality = 0.0;
  Scalar op = 0.0;
  Scalar mean_locality_displacement = 0.0;
  // Edit outcome counts over the whole stream.
  std::uint64_t inserted = 0;
  std::uint64_t refined = 0;
  std::uint64_t conflict_inserted = 0;
  std::vector<CheckpointMetrics> per_checkpoint;
};

/// Applies the stream strictly in order, evaluating retrospectively at each
/// checkpoint (over all edits seen so far): reliability = fraction of edit
/// queries routed to their own label with the payload within the loss
/// threshold, generalization = the same on paraphrase queries, locality =
/// fraction of unrelated queries left unmatched. Checkpoints beyond the
/// stream length are ignored; an empty list means one checkpoint at the end.
MetricsReport run_lifelong(const std::vector<EditSample>& stream,
                           RouterKind router, const HopfieldParams& params,
                           const AdaptorConfig& adaptor_config,
                           std::vector<std::uint64_t> checkpoints = {});

enum class SweepAxis { steps, gamma, beta, threshold, paraphrase_angle };

std::optional<SweepAxis> axis_from_string(std::string_view s);
std::string to_string(SweepAxis axis);

struct SweepPoint {
  Scalar value = 0.0;
  MetricsReport report;
};

struct SweepReport {
  SweepAxis axis = SweepAxis::steps;
  std::vector<SweepPoint> points;
};

/// Reruns the benchmark once per axis value, everything else held fixed
/// (same seed; the stream is regenerated only when the axis changes it).
/// steps values are rounded to the nearest integer.
SweepReport sweep(const StreamConfig& stream_cfg, RouterKind router,
                  const HopfieldParams& base, const AdaptorConfig& adaptor,
                  SweepAxis axis, const std::vector<Scalar>& values);

struct LatencyProbe {
  std::uint64_t entries = 0;
  Scalar seconds_per_query = 0.0;
};

struct StressCheckpoint {
  CheckpointMetrics metrics;
  Scalar elapsed_seconds = 0.0;     // since the start of the run
  std::uint64_t parameter_count = 0;  // 2 * dim per entry
};

struct ScalingConfig {
  StreamConfig stream{.n_edits = 50000,
                      .dim = 64,
                      .paraphrase_angle = 0.15,
                      .seed = 42};
  HopfieldParams params;
  AdaptorConfig adaptor;
  std::vector<std::uint64_t> checkpoints = {1000, 10000, 20000, 50000};
  Scalar time_ceiling_seconds = 1800.0;
};

struct ScalingReport {
  std::vector<StressCheckpoint> checkpoints;
  std::vector<LatencyProbe> probes;  // single-query match wall time
  Scalar latency_fit_r2 = 0.0;       // linear fit over probes up to 16384
  Scalar latency_ratio_50k_25k = 0.0;  // 0 when either probe is missing
  Scalar total_seconds = 0.0;
  std::uint64_t final_entries = 0;
};

/// Long-horizon growth run with the full router. Times match latency at
/// fixed sizes (1K 2K 4K 8K 16K 25K 50K, as reached) and throws
/// ResourceBudgetExceededError when the time ceiling is crossed.
ScalingReport scaling_stress(const ScalingConfig& cfg);

}  // namespace horen::bench
