#include "horen/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>

namespace horen::bench {

namespace {

using Clock = std::chrono::steady_clock;

constexpr Index kEvalBlock = 256;  // queries scored per matrix product

VectorX random_gaussian(std::mt19937_64& rng,
                        std::normal_distribution<Scalar>& gauss, Index dim) {
  VectorX v(dim);
  for (Index i = 0; i < dim; ++i) {
    v[i] = gauss(rng);
  }
  return v;
}

VectorX random_unit(std::mt19937_64& rng,
                    std::normal_distribution<Scalar>& gauss, Index dim) {
  for (;;) {
    VectorX v = random_gaussian(rng, gauss, dim);
    const Scalar n = v.norm();
    if (n >= kZeroNormThreshold) {
      return v / n;
    }
  }
}

// Unit vector at exactly `angle` radians from unit `u`, along a random
// tangent direction.
VectorX rotate_from(const VectorX& u, Scalar angle, std::mt19937_64& rng,
                    std::normal_distribution<Scalar>& gauss) {
  if (angle == 0.0) {
    return u;
  }
  for (;;) {
    VectorX v = random_gaussian(rng, gauss, u.size());
    VectorX t = v - v.dot(u) * u;
    const Scalar n = t.norm();
    if (n >= 1e-9) {
      t /= n;
      return std::cos(angle) * u + std::sin(angle) * t;
    }
  }
}

}  // namespace

void StreamConfig::validate() const {
  if (n_edits < 1) {
    throw InvalidConfigError("n_edits must be >= 1");
  }
  if (dim < 2) {
    throw InvalidConfigError("dim must be >= 2");
  }
  if (!(paraphrase_angle >= 0.0) ||
      !(paraphrase_angle < std::numbers::pi / 2)) {
    throw InvalidConfigError("paraphrase_angle must lie in [0, pi/2)");
  }
  if (!(locality_angle >= 0.0) || !(locality_angle <= std::numbers::pi)) {
    throw InvalidConfigError("locality_angle must lie in [0, pi]");
  }
  if (hard_locality && resolved_locality_angle() <= 0.0) {
    throw InvalidConfigError("hard locality needs a positive angle");
  }
  if (!(magnitude_jitter >= 0.0)) {
    throw InvalidConfigError("magnitude_jitter must be >= 0");
  }
  if (!(reassert_fraction >= 0.0) || !(conflict_fraction >= 0.0) ||
      reassert_fraction + conflict_fraction > 1.0) {
    throw InvalidConfigError("replay fractions must be >= 0 and sum to <= 1");
  }
}

std::vector<EditSample> generate_stream(const StreamConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  std::uniform_real_distribution<Scalar> unif(0.0, 1.0);
  const auto n = static_cast<std::size_t>(cfg.n_edits);
  const Index d = cfg.dim;

  std::vector<VectorX> dirs(n);
  for (auto& u : dirs) {
    u = random_unit(rng, gauss, d);
  }

  std::vector<EditSample> stream(n);
  const Scalar loc_angle = cfg.resolved_locality_angle();
  for (std::size_t t = 0; t < n; ++t) {
    EditSample& s = stream[t];
    s.index = t;
    const Scalar theta = unif(rng) * cfg.paraphrase_angle;
    const VectorX para_dir = rotate_from(dirs[t], theta, rng, gauss);
    VectorX loc_dir;
    if (cfg.hard_locality) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      loc_dir = rotate_from(dirs[pick(rng)], loc_angle, rng, gauss);
    } else {
      loc_dir = random_unit(rng, gauss, d);
    }
    const Scalar se = 1.0 + unif(rng) * cfg.magnitude_jitter;
    const Scalar sp = 1.0 + unif(rng) * cfg.magnitude_jitter;
    const Scalar sl = 1.0 + unif(rng) * cfg.magnitude_jitter;
    s.edit_query = se * dirs[t];
    s.paraphrase_query = sp * para_dir;
    s.locality_query = sl * loc_dir;
    s.target.label = "fact-" + std::to_string(t);
    s.target.target_vector = random_unit(rng, gauss, d);
  }

  // Replay injection: rewrite a fraction of later edits to re-assert or
  // contradict an earlier one. The replayed raw query is copied bit-exactly.
  for (std::size_t t = 1; t < n; ++t) {
    const Scalar r = unif(rng);
    const bool conflict = r < cfg.conflict_fraction;
    const bool reassert =
        !conflict && r < cfg.conflict_fraction + cfg.reassert_fraction;
    if (!conflict && !reassert) {
      continue;
    }
    std::uniform_int_distribution<std::size_t> pick(0, t - 1);
    const std::size_t src = pick(rng);
    EditSample& s = stream[t];
    s.edit_query = stream[src].edit_query;
    dirs[t] = dirs[src];
    const Scalar theta = unif(rng) * cfg.paraphrase_angle;
    const Scalar sp = 1.0 + unif(rng) * cfg.magnitude_jitter;
    s.paraphrase_query = sp * rotate_from(dirs[src], theta, rng, gauss);
    if (reassert) {
      s.target = stream[src].target;
    }
    // A conflict keeps its own fresh label and target on the same query.
  }
  return stream;
}

std::optional<RouterKind> router_from_string(std::string_view s) {
  if (s == "horen") return RouterKind::horen;
  if (s == "cosine-only") return RouterKind::cosine_only;
  if (s == "euclidean") return RouterKind::euclidean;
  if (s == "hopfield-unnormalized") return RouterKind::hopfield_unnormalized;
  return std::nullopt;
}

std::string to_string(RouterKind kind) {
  switch (kind) {
    case RouterKind::horen: return "horen";
    case RouterKind::cosine_only: return "cosine-only";
    case RouterKind::euclidean: return "euclidean";
    case RouterKind::hopfield_unnormalized: return "hopfield-unnormalized";
  }
  return "?";
}

std::optional<SweepAxis> axis_from_string(std::string_view s) {
  if (s == "steps") return SweepAxis::steps;
  if (s == "gamma") return SweepAxis::gamma;
  if (s == "beta") return SweepAxis::beta;
  if (s == "threshold") return SweepAxis::threshold;
  if (s == "paraphrase-angle") return SweepAxis::paraphrase_angle;
  return std::nullopt;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::steps: return "steps";
    case SweepAxis::gamma: return "gamma";
    case SweepAxis::beta: return "beta";
    case SweepAxis::threshold: return "threshold";
    case SweepAxis::paraphrase_angle: return "paraphrase-angle";
  }
  return "?";
}

namespace {

// One routing surface over one store. The full router and the cosine-only
// ablation share the real codebook path; the two raw-vector baselines keep
// their own unnormalized key store with the same three-case edit policy.
class Router {
 public:
  Router(RouterKind kind, Index dim, const HopfieldParams& params,
         const AdaptorConfig& adaptor)
      : kind_(kind),
        dim_(dim),
        params_(params),
        adaptor_(adaptor),
        book_(dim),
        radius_sq_(2.0 - 2.0 * params.threshold) {
    if (kind_ == RouterKind::cosine_only) {
      params_.max_steps = 0;
    }
  }

  bool uses_codebook() const {
    return kind_ == RouterKind::horen || kind_ == RouterKind::cosine_only;
  }

  Index entries() const {
    return uses_codebook() ? book_.size() : raw_size_;
  }

  const Codebook& book() const { return book_; }

  const EntryLabel& label(Index i) const {
    return uses_codebook() ? book_.entry(i).label : raw_labels_[i];
  }

  const Payload& payload(Index i) const {
    return uses_codebook() ? book_.entry(i).payload : raw_payloads_[i];
  }

  EditAction apply(const EditSample& s) {
    if (uses_codebook()) {
      return apply_edit(book_, s.edit_query, s.target, params_, adaptor_)
          .action;
    }
    return raw_apply(s);
  }

  struct Lean {
    bool matched = false;
    Index best = -1;
    Scalar displacement = 0.0;
  };

  void route_batch(const RowMatrixX& queries, std::vector<Lean>& out) const {
    const Index b = queries.rows();
    out.assign(b, Lean{});
    if (entries() == 0) {
      return;
    }
    switch (kind_) {
      case RouterKind::horen:
      case RouterKind::cosine_only:
        route_batch_normalized(queries, out);
        return;
      case RouterKind::euclidean:
        route_batch_euclidean(queries, out);
        return;
      case RouterKind::hopfield_unnormalized:
        route_batch_unnormalized(queries, out);
        return;
    }
  }

 private:
  Eigen::Ref<const RowMatrixX> raw_keys() const {
    return raw_key_storage_.topRows(raw_size_);
  }

  void raw_insert(const VectorX& key, Payload p, EntryLabel label) {
    if (raw_size_ == raw_key_storage_.rows()) {
      raw_key_storage_.conservativeResize(
          std::max<Index>(64, raw_key_storage_.rows() * 2), dim_);
      raw_key_sqnorm_.conservativeResize(raw_key_storage_.rows());
    }
    raw_key_storage_.row(raw_size_) = key.transpose();
    raw_key_sqnorm_[raw_size_] = key.squaredNorm();
    raw_payloads_.push_back(std::move(p));
    raw_labels_.push_back(std::move(label));
    ++raw_size_;
  }

  // Raw-key variant of the three-case edit policy.
  EditAction raw_apply(const EditSample& s) {
    bool matched = false;
    Index best = -1;
    if (raw_size_ > 0) {
      if (kind_ == RouterKind::euclidean) {
        const VectorX scores = raw_keys() * s.edit_query;
        const Scalar qsq = s.edit_query.squaredNorm();
        Scalar best_d2 = 0.0;
        for (Index i = 0; i < raw_size_; ++i) {
          const Scalar d2 = raw_key_sqnorm_[i] - 2.0 * scores[i] + qsq;
          if (best < 0 || d2 < best_d2) {
            best = i;
            best_d2 = d2;
          }
        }
        matched = best_d2 <= radius_sq_;
      } else {
        const VectorX q = refine_unnormalized(s.edit_query);
        const VectorX scores = raw_keys() * q;
        best = 0;
        for (Index i = 1; i < raw_size_; ++i) {
          if (scores[i] > scores[best]) {
            best = i;
          }
        }
        matched = scores[best] > params_.threshold;
      }
    }
    if (matched && raw_labels_[best] == s.target.label) {
      raw_payloads_[best] =
          train_payload(raw_payloads_[best], s.target, adaptor_);
      return EditAction::Refined;
    }
    raw_insert(s.edit_query,
               train_payload(Payload::cold(dim_), s.target, adaptor_),
               s.target.label);
    return matched ? EditAction::ConflictInserted : EditAction::Inserted;
  }

  VectorX refine_unnormalized(const VectorX& q0) const {
    VectorX q = q0;
    for (int m = 0; m < params_.max_steps; ++m) {
      const VectorX scores = raw_keys() * q;
      const VectorX p = softmax(scores, params_.beta);
      const VectorX cand = raw_keys().transpose() * p;
      if ((cand - q).norm() <= params_.epsilon) {
        break;
      }
      q = (1.0 - params_.gamma) * q + params_.gamma * cand;
    }
    return q;
  }

  // Batched mirror of the single-query damped refinement: same update rule,
  // same stop conditions, applied row-wise.
  void refine_batch(RowMatrixX& q, const Eigen::Ref<const RowMatrixX>& keys)
      const {
    const Index b = q.rows();
    if (params_.max_steps == 0) {
      return;
    }
    std::vector<char> active(b, 1);
    RowMatrixX s, qn;
    VectorX cand(dim_), mix(dim_);
    for (int m = 0; m < params_.max_steps; ++m) {
      s.noalias() = q * keys.transpose();
      const VectorX rowmax = s.rowwise().maxCoeff();
      s.array() = ((s.array().colwise() - rowmax.array()) * params_.beta).exp();
      const VectorX rowsum = s.rowwise().sum();
      qn.noalias() = s * keys;
      bool any_active = false;
      for (Index r = 0; r < b; ++r) {
        if (!active[r]) {
          continue;
        }
        cand = qn.row(r).transpose() / rowsum[r];
        const Scalar n = cand.norm();
        if (n < kZeroNormThreshold) {
          active[r] = 0;
          continue;
        }
        cand /= n;
        if ((cand.transpose() - q.row(r)).norm() <= params_.epsilon) {
          active[r] = 0;
          continue;
        }
        mix = (1.0 - params_.gamma) * q.row(r).transpose() +
              params_.gamma * cand;
        const Scalar mn = mix.norm();
        if (mn < kZeroNormThreshold) {
          active[r] = 0;
          continue;
        }
        q.row(r) = mix.transpose() / mn;
        any_active = true;
      }
      if (!any_active) {
        return;
      }
    }
  }

  void route_batch_normalized(const RowMatrixX& queries,
                              std::vector<Lean>& out) const {
    RowMatrixX q = queries;
    const Index b = q.rows();
    for (Index r = 0; r < b; ++r) {
      const Scalar n = q.row(r).norm();
      if (n < kZeroNormThreshold) {
        throw ZeroNormError("query row " + std::to_string(r) +
                            " cannot be normalized");
      }
      q.row(r) /= n;
    }
    const RowMatrixX q0 = q;
    refine_batch(q, book_.keys());
    const RowMatrixX scores = q * book_.keys().transpose();
    for (Index r = 0; r < b; ++r) {
      Index best = 0;
      for (Index i = 1; i < scores.cols(); ++i) {
        if (scores(r, i) > scores(r, best)) {
          best = i;
        }
      }
      out[r].best = best;
      out[r].matched = scores(r, best) > params_.threshold;
      out[r].displacement = (q.row(r) - q0.row(r)).norm();
    }
  }

  void route_batch_euclidean(const RowMatrixX& queries,
                             std::vector<Lean>& out) const {
    const RowMatrixX scores = queries * raw_keys().transpose();
    for (Index r = 0; r < queries.rows(); ++r) {
      const Scalar qsq = queries.row(r).squaredNorm();
      Index best = 0;
      Scalar best_d2 = raw_key_sqnorm_[0] - 2.0 * scores(r, 0) + qsq;
      for (Index i = 1; i < raw_size_; ++i) {
        const Scalar d2 = raw_key_sqnorm_[i] - 2.0 * scores(r, i) + qsq;
        if (d2 < best_d2) {
          best = i;
          best_d2 = d2;
        }
      }
      out[r].best = best;
      out[r].matched = best_d2 <= radius_sq_;
    }
  }

  void route_batch_unnormalized(const RowMatrixX& queries,
                                std::vector<Lean>& out) const {
    RowMatrixX q = queries;
    const Index b = q.rows();
    if (params_.max_steps > 0) {
      std::vector<char> active(b, 1);
      RowMatrixX s, qn;
      VectorX cand(dim_);
      for (int m = 0; m < params_.max_steps; ++m) {
        s.noalias() = q * raw_keys().transpose();
        const VectorX rowmax = s.rowwise().maxCoeff();
        s.array() =
            ((s.array().colwise() - rowmax.array()) * params_.beta).exp();
        const VectorX rowsum = s.rowwise().sum();
        qn.noalias() = s * raw_keys();
        bool any_active = false;
        for (Index r = 0; r < b; ++r) {
          if (!active[r]) {
            continue;
          }
          cand = qn.row(r).transpose() / rowsum[r];
          if ((cand.transpose() - q.row(r)).norm() <= params_.epsilon) {
            active[r] = 0;
            continue;
          }
          q.row(r) = (1.0 - params_.gamma) * q.row(r) +
                     params_.gamma * cand.transpose();
          any_active = true;
        }
        if (!any_active) {
          break;
        }
      }
    }
    const RowMatrixX scores = q * raw_keys().transpose();
    for (Index r = 0; r < b; ++r) {
      Index best = 0;
      for (Index i = 1; i < scores.cols(); ++i) {
        if (scores(r, i) > scores(r, best)) {
          best = i;
        }
      }
      out[r].best = best;
      out[r].matched = scores(r, best) > params_.threshold;
      out[r].displacement = (q.row(r) - queries.row(r)).norm();
    }
  }

  RouterKind kind_;
  Index dim_;
  HopfieldParams params_;
  AdaptorConfig adaptor_;
  Codebook book_;
  Scalar radius_sq_;

  RowMatrixX raw_key_storage_;
  VectorX raw_key_sqnorm_;
  std::vector<Payload> raw_payloads_;
  std::vector<EntryLabel> raw_labels_;
  Index raw_size_ = 0;
};

CheckpointMetrics evaluate_checkpoint(const Router& router,
                                      const std::vector<EditSample>& stream,
                                      std::uint64_t upto,
                                      const AdaptorConfig& adaptor) {
  const Index d = stream[0].edit_query.size();
  std::uint64_t rel_ok = 0;
  std::uint64_t gen_ok = 0;
  std::uint64_t loc_ok = 0;
  Scalar disp_sum = 0.0;

  RowMatrixX block;
  std::vector<Router::Lean> leans;
  auto scan = [&](auto&& query_of, auto&& consume) {
    for (std::uint64_t start = 0; start < upto; start += kEvalBlock) {
      const Index b =
          static_cast<Index>(std::min<std::uint64_t>(kEvalBlock, upto - start));
      block.resize(b, d);
      for (Index r = 0; r < b; ++r) {
        block.row(r) = query_of(stream[start + r]).transpose();
      }
      router.route_batch(block, leans);
      for (Index r = 0; r < b; ++r) {
        consume(stream[start + r], leans[r]);
      }
    }
  };

  auto routed_correctly = [&](const EditSample& s, const Router::Lean& lean) {
    return lean.matched && router.label(lean.best) == s.target.label &&
           evaluate_payload(router.payload(lean.best), s.target) <=
               adaptor.loss_threshold;
  };
  scan([](const EditSample& s) -> const VectorX& { return s.edit_query; },
       [&](const EditSample& s, const Router::Lean& lean) {
         rel_ok += routed_correctly(s, lean) ? 1 : 0;
       });
  scan([](const EditSample& s) -> const VectorX& { return s.paraphrase_query; },
       [&](const EditSample& s, const Router::Lean& lean) {
         gen_ok += routed_correctly(s, lean) ? 1 : 0;
       });
  scan([](const EditSample& s) -> const VectorX& { return s.locality_query; },
       [&](const EditSample&, const Router::Lean& lean) {
         loc_ok += lean.matched ? 0 : 1;
         disp_sum += lean.displacement;
       });

  CheckpointMetrics m;
  m.checkpoint = upto;
  const auto p = static_cast<Scalar>(upto);
  m.reliability = rel_ok / p;
  m.generalization = gen_ok / p;
  m.locality = loc_ok / p;
  m.op = std::cbrt(m.reliability * m.generalization * m.locality);
  m.mean_locality_displacement = disp_sum / p;
  return m;
}

std::vector<std::uint64_t> resolve_checkpoints(
    std::vector<std::uint64_t> checkpoints, std::uint64_t n) {
  std::erase_if(checkpoints,
                [n](std::uint64_t c) { return c == 0 || c > n; });
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()),
                    checkpoints.end());
  if (checkpoints.empty()) {
    checkpoints.push_back(n);
  }
  return checkpoints;
}

void count_action(MetricsReport& report, EditAction action) {
  switch (action) {
    case EditAction::Inserted: ++report.inserted; break;
    case EditAction::Refined: ++report.refined; break;
    case EditAction::ConflictInserted: ++report.conflict_inserted; break;
  }
}

}  // namespace

MetricsReport run_lifelong(const std::vector<EditSample>& stream,
                           RouterKind kind, const HopfieldParams& params,
                           const AdaptorConfig& adaptor_config,
                           std::vector<std::uint64_t> checkpoints) {
  params.validate();
  adaptor_config.validate();
  if (stream.empty()) {
    throw InvalidConfigError("stream is empty");
  }
  const auto n = static_cast<std::uint64_t>(stream.size());
  checkpoints = resolve_checkpoints(std::move(checkpoints), n);

  Router router(kind, stream[0].edit_query.size(), params, adaptor_config);
  MetricsReport report;
  auto next_cp = checkpoints.begin();
  for (std::uint64_t t = 0; t < n; ++t) {
    count_action(report, router.apply(stream[t]));
    if (next_cp != checkpoints.end() && t + 1 == *next_cp) {
      report.per_checkpoint.push_back(
          evaluate_checkpoint(router, stream, t + 1, adaptor_config));
      ++next_cp;
    }
  }
  const CheckpointMetrics& last = report.per_checkpoint.back();
  report.reliability = last.reliability;
  report.generalization = last.generalization;
  report.locality = last.locality;
  report.op = last.op;
  report.mean_locality_displacement = last.mean_locality_displacement;
  return report;
}

SweepReport sweep(const StreamConfig& stream_cfg, RouterKind router,
                  const HopfieldParams& base, const AdaptorConfig& adaptor,
                  SweepAxis axis, const std::vector<Scalar>& values) {
  if (values.empty()) {
    throw InvalidConfigError("sweep needs at least one value");
  }
  SweepReport report;
  report.axis = axis;
  for (const Scalar v : values) {
    HopfieldParams params = base;
    StreamConfig cfg = stream_cfg;
    switch (axis) {
      case SweepAxis::steps:
        params.max_steps = static_cast<int>(std::llround(v));
        break;
      case SweepAxis::gamma: params.gamma = v; break;
      case SweepAxis::beta: params.beta = v; break;
      case SweepAxis::threshold: params.threshold = v; break;
      case SweepAxis::paraphrase_angle: cfg.paraphrase_angle = v; break;
    }
    const std::vector<EditSample> stream = generate_stream(cfg);
    report.points.push_back(
        SweepPoint{v, run_lifelong(stream, router, params, adaptor)});
  }
  return report;
}

namespace {

// Median wall time of a single match() call at the book's current size.
Scalar probe_match_latency(const Codebook& book, Scalar threshold,
                           std::uint64_t seed) {
  // Median over many short repeats: on shared hosts, single-run timings
  // carry multi-millisecond scheduler spikes that would distort the
  // size-to-size latency ratios.
  constexpr int kQueries = 64;
  constexpr int kRepeats = 9;
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  std::vector<UnitVector> queries;
  queries.reserve(kQueries);
  for (int i = 0; i < kQueries; ++i) {
    queries.push_back(normalize(random_gaussian(rng, gauss, book.dim())));
  }
  volatile Scalar sink = 0.0;
  for (const auto& q : queries) {  // warm the cache
    sink = sink + match(book, q, threshold).best_score;
  }
  std::vector<Scalar> times(kRepeats);
  for (int rep = 0; rep < kRepeats; ++rep) {
    const auto t0 = Clock::now();
    for (const auto& q : queries) {
      sink = sink + match(book, q, threshold).best_score;
    }
    const auto t1 = Clock::now();
    times[rep] = std::chrono::duration<Scalar>(t1 - t0).count() / kQueries;
  }
  std::sort(times.begin(), times.end());
  return times[kRepeats / 2];
}

Scalar linear_fit_r2(const std::vector<Scalar>& x,
                     const std::vector<Scalar>& y) {
  const auto n = static_cast<Scalar>(x.size());
  if (x.size() < 2) {
    return 0.0;
  }
  Scalar sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const Scalar cov = n * sxy - sx * sy;
  const Scalar vx = n * sxx - sx * sx;
  const Scalar vy = n * syy - sy * sy;
  if (vx <= 0 || vy <= 0) {
    return 0.0;
  }
  return (cov * cov) / (vx * vy);
}

}  // namespace

ScalingReport scaling_stress(const ScalingConfig& cfg) {
  cfg.params.validate();
  cfg.adaptor.validate();
  if (!(cfg.time_ceiling_seconds > 0)) {
    throw InvalidConfigError("time ceiling must be > 0");
  }
  const std::vector<EditSample> stream = generate_stream(cfg.stream);
  const auto n = static_cast<std::uint64_t>(stream.size());
  const std::vector<std::uint64_t> checkpoints =
      resolve_checkpoints(cfg.checkpoints, n);

  std::vector<std::uint64_t> probe_sizes = {1000,  2000,  4000, 8000,
                                            16000, 25000, 50000};
  std::erase_if(probe_sizes, [n](std::uint64_t p) { return p > n; });

  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(
                  std::chrono::duration<Scalar>(cfg.time_ceiling_seconds));
  auto elapsed = [&start] {
    return std::chrono::duration<Scalar>(Clock::now() - start).count();
  };

  Router router(RouterKind::horen, cfg.stream.dim, cfg.params, cfg.adaptor);
  ScalingReport report;
  auto next_cp = checkpoints.begin();
  std::size_t next_probe = 0;
  for (std::uint64_t t = 0; t < n; ++t) {
    if (Clock::now() > deadline) {
      throw ResourceBudgetExceededError(
          "time ceiling hit after " + std::to_string(t) + " edits (" +
          std::to_string(cfg.time_ceiling_seconds) + "s)");
    }
    router.apply(stream[t]);
    const auto size = static_cast<std::uint64_t>(router.entries());
    if (next_probe < probe_sizes.size() && size >= probe_sizes[next_probe]) {
      report.probes.push_back(LatencyProbe{
          size, probe_match_latency(router.book(), cfg.params.threshold,
                                    cfg.stream.seed ^ 0x9e3779b97f4a7c15ULL)});
      ++next_probe;
    }
    if (next_cp != checkpoints.end() && t + 1 == *next_cp) {
      StressCheckpoint sc;
      sc.metrics = evaluate_checkpoint(router, stream, t + 1, cfg.adaptor);
      sc.elapsed_seconds = elapsed();
      sc.parameter_count =
          2 * static_cast<std::uint64_t>(cfg.stream.dim) * size;
      report.checkpoints.push_back(sc);
      ++next_cp;
    }
  }

  std::vector<Scalar> xs, ys;
  Scalar at_25k = 0.0, at_50k = 0.0;
  for (const LatencyProbe& p : report.probes) {
    if (p.entries <= 16384) {
      xs.push_back(static_cast<Scalar>(p.entries));
      ys.push_back(p.seconds_per_query);
    }
    if (p.entries == 25000) at_25k = p.seconds_per_query;
    if (p.entries == 50000) at_50k = p.seconds_per_query;
  }
  report.latency_fit_r2 = linear_fit_r2(xs, ys);
  report.latency_ratio_50k_25k = at_25k > 0.0 ? at_50k / at_25k : 0.0;
  report.total_seconds = elapsed();
  report.final_entries = static_cast<std::uint64_t>(router.entries());
  return report;
}

}  // namespace horen::bench
