// Command-line front end: benchmark runs, parameter sweeps, dynamics
// verification, the long-horizon stress run, and codebook persistence.
//
// Exit codes: 0 success, 1 usage/config/IO error, 2 property violation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "horen/bench.hpp"
#include "horen/report_io.hpp"
#include "horen/serialize.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

namespace fs = std::filesystem;
using nlohmann::json;
using namespace horen;

json to_json(const bench::StreamConfig& s) {
  return json{{"n_edits", s.n_edits},
              {"dim", s.dim},
              {"paraphrase_angle", s.paraphrase_angle},
              {"hard_locality", s.hard_locality},
              {"locality_angle", s.locality_angle},
              {"seed", s.seed},
              {"magnitude_jitter", s.magnitude_jitter},
              {"reassert_fraction", s.reassert_fraction},
              {"conflict_fraction", s.conflict_fraction}};
}

json to_json(const HopfieldParams& p) {
  return json{{"beta", p.beta},
              {"gamma", p.gamma},
              {"max_steps", p.max_steps},
              {"epsilon", p.epsilon},
              {"threshold", p.threshold}};
}

json to_json(const AdaptorConfig& a) {
  return json{{"learning_rate", a.learning_rate},
              {"max_steps", a.max_steps},
              {"loss_threshold", a.loss_threshold},
              {"patience", a.patience}};
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    json body) {
  body["command"] = command;
  body["version"] = kVersion;
  io::write_text_file(out_dir / "manifest.json", body.dump(2) + "\n");
}

// ---------------------------------------------------------------- bench --

struct BenchOpts {
  bench::StreamConfig stream;
  HopfieldParams params;
  AdaptorConfig adaptor;
  std::string router = "horen";
  std::vector<std::uint64_t> checkpoints;
  std::string out_dir = ".";
};

int cmd_bench(const BenchOpts& o) {
  const auto kind = bench::router_from_string(o.router);
  if (!kind) {
    throw InvalidConfigError("unknown router: " + o.router);
  }
  const auto stream = bench::generate_stream(o.stream);
  const auto report =
      bench::run_lifelong(stream, *kind, o.params, o.adaptor, o.checkpoints);

  const fs::path out(o.out_dir);
  io::write_text_file(out / "metrics.csv", io::metrics_csv(report));
  io::write_text_file(out / "metrics.json", io::metrics_json(report));
  write_manifest(out, "bench",
                 json{{"stream", to_json(o.stream)},
                      {"hopfield", to_json(o.params)},
                      {"adaptor", to_json(o.adaptor)},
                      {"router", o.router},
                      {"checkpoints", o.checkpoints}});

  std::cout << "router=" << o.router << " edits=" << stream.size()
            << " reliability=" << report.reliability
            << " generalization=" << report.generalization
            << " locality=" << report.locality << " op=" << report.op << "\n"
            << "wrote " << (out / "metrics.csv").string() << ", "
            << (out / "metrics.json").string() << ", "
            << (out / "manifest.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- sweep --

struct SweepOpts {
  BenchOpts base;
  std::string axis;
  std::vector<Scalar> values;
};

int cmd_sweep(const SweepOpts& o) {
  const auto kind = bench::router_from_string(o.base.router);
  if (!kind) {
    throw InvalidConfigError("unknown router: " + o.base.router);
  }
  const auto axis = bench::axis_from_string(o.axis);
  if (!axis) {
    throw InvalidConfigError(
        "unknown axis: " + o.axis +
        " (valid: steps, gamma, beta, threshold, paraphrase-angle)");
  }
  const auto report = bench::sweep(o.base.stream, *kind, o.base.params,
                                   o.base.adaptor, *axis, o.values);

  const fs::path out(o.base.out_dir);
  io::write_text_file(out / "sweep.csv", io::sweep_csv(report));
  io::write_text_file(out / "sweep.json", io::sweep_json(report));
  write_manifest(out, "sweep",
                 json{{"stream", to_json(o.base.stream)},
                      {"hopfield", to_json(o.base.params)},
                      {"adaptor", to_json(o.base.adaptor)},
                      {"router", o.base.router},
                      {"axis", o.axis},
                      {"values", o.values}});

  for (const auto& p : report.points) {
    std::cout << o.axis << "=" << p.value << " op=" << p.report.op
              << " locality=" << p.report.locality << "\n";
  }
  std::cout << "wrote " << (out / "sweep.csv").string() << ", "
            << (out / "sweep.json").string() << ", "
            << (out / "manifest.json").string() << "\n";
  return 0;
}

// --------------------------------------------------------------- verify --

struct VerifyOpts {
  int instances = 200;
  std::uint64_t seed = 42;
  bool naive_softmax = false;
};

RowMatrixX random_unit_rows(std::mt19937_64& rng, Index c, Index d) {
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  RowMatrixX keys(c, d);
  for (Index r = 0; r < c; ++r) {
    for (;;) {
      for (Index j = 0; j < d; ++j) {
        keys(r, j) = gauss(rng);
      }
      const Scalar n = keys.row(r).norm();
      if (n >= kZeroNormThreshold) {
        keys.row(r) /= n;
        break;
      }
    }
  }
  return keys;
}

UnitVector random_unit_query(std::mt19937_64& rng, Index d) {
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  VectorX v(d);
  for (;;) {
    for (Index j = 0; j < d; ++j) {
      v[j] = gauss(rng);
    }
    if (v.norm() >= kZeroNormThreshold) {
      return normalize(v);
    }
  }
}

// Harness sanity probe: rebuild a trace's energies with a softmax that skips
// max-subtraction at a huge inverse temperature. The overflow must surface
// as a rejected trace, proving the checks cannot silently pass garbage.
int run_naive_softmax_probe() {
  const Index d = 8;
  std::mt19937_64 rng(7);
  RowMatrixX keys = random_unit_rows(rng, 4, d);
  VectorX e1 = VectorX::Zero(d);
  e1[0] = 1.0;
  keys.row(0) = e1.transpose();  // guarantees a score of exactly 1
  const Scalar huge_beta = 1e6;

  IterationTrace bad = iterate_standard(keys, normalize(e1), 20.0, 5, 0.0);
  bad.beta = huge_beta;
  try {
    for (std::size_t s = 0; s < bad.iterates.size(); ++s) {
      const VectorX scores = keys * bad.iterates[s];
      const Scalar naive_lse =
          std::log((huge_beta * scores.array()).exp().sum()) / huge_beta;
      bad.energies[s] = 0.5 * bad.iterates[s].squaredNorm() - naive_lse;
    }
    const DescentReport rep = check_descent(bad);
    if (!rep.ok || !std::isfinite(rep.worst_margin)) {
      throw NonFiniteLossError(
          "naive softmax (no max subtraction) at beta=1e+06 overflowed; "
          "descent check rejected the trace");
    }
  } catch (const NonFiniteLossError& e) {
    std::cout << "harness-sanity FAIL " << e.what() << "\n";
    return 2;
  }
  std::cout << "harness-sanity unexpected PASS (overflow did not surface)\n";
  return 0;
}

int cmd_verify(const VerifyOpts& o) {
  if (o.naive_softmax) {
    return run_naive_softmax_probe();
  }
  if (o.instances < 1) {
    throw InvalidConfigError("instances must be >= 1");
  }
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<Index> c_dist(1, 64);
  std::uniform_int_distribution<Index> d_dist(2, 32);
  std::uniform_int_distribution<int> b_pick(0, 2);
  const Scalar betas[3] = {1.0, 5.0, 20.0};

  bool descent_ok = true;
  Scalar descent_worst = -std::numeric_limits<Scalar>::infinity();
  long long descent_pairs = 0;

  const int m_values[4] = {1, 4, 16, 100};
  bool bound_ok = true;
  Scalar bound_worst_slack[4];
  std::fill(std::begin(bound_worst_slack), std::end(bound_worst_slack),
            -std::numeric_limits<Scalar>::infinity());
  Scalar gap_worst = -std::numeric_limits<Scalar>::infinity();

  int converged = 0;
  Scalar hull_worst = 0.0;
  bool hull_ok = true;

  for (int i = 0; i < o.instances; ++i) {
    const Index c = c_dist(rng);
    const Index d = d_dist(rng);
    const Scalar beta = betas[b_pick(rng)];
    const RowMatrixX keys = random_unit_rows(rng, c, d);
    const UnitVector q0 = random_unit_query(rng, d);

    const DescentReport dr = check_descent(
        iterate_standard(keys, q0, beta, 100, 0.0));
    descent_ok = descent_ok && dr.ok;
    descent_pairs += dr.pairs_checked;
    if (!(dr.worst_margin <= descent_worst)) {
      descent_worst = dr.worst_margin;
    }

    for (int mi = 0; mi < 4; ++mi) {
      const BoundReport br = check_residual_bound(
          iterate_standard(keys, q0, beta, m_values[mi], 0.0));
      bound_ok = bound_ok && br.ok;
      const Scalar slack = br.min_residual - br.bound;
      if (!(slack <= bound_worst_slack[mi])) {
        bound_worst_slack[mi] = slack;
      }
      const Scalar gap_slack = br.energy_gap - 2.0;
      if (!(gap_slack <= gap_worst)) {
        gap_worst = gap_slack;
      }
    }

    const IterationTrace conv = iterate_standard(keys, q0, beta, 10000, 1e-8);
    if (conv.stopped_early) {
      ++converged;
      const VectorX& fp = conv.iterates.back();
      const VectorX p = softmax(keys * fp, beta);
      const Scalar err = (keys.transpose() * p - fp).norm();
      if (!(err <= hull_worst)) {
        hull_worst = err;
      }
      hull_ok = hull_ok && err <= 1e-6;
    }
  }

  const Scalar conv_frac = static_cast<Scalar>(converged) / o.instances;
  const bool conv_ok = conv_frac >= 0.99 && hull_ok;

  RowMatrixX sep_keys = RowMatrixX::Zero(8, 16);
  for (Index i = 0; i < 8; ++i) {
    sep_keys(i, i) = 1.0;
  }
  const OverAttractionReport oa =
      demonstrate_over_attraction(sep_keys, 20.0, 1000, 0.85, o.seed);
  const bool oa_ok =
      oa.converged_exceed_fraction > 0.0 &&
      oa.converged_exceed_fraction >= 10.0 * oa.damped_exceed_fraction;

  std::cout.precision(6);
  std::cout << "descent         " << (descent_ok ? "PASS" : "FAIL")
            << "  instances=" << o.instances << " pairs=" << descent_pairs
            << " worst_margin=" << descent_worst << "\n";
  for (int mi = 0; mi < 4; ++mi) {
    char bound_str[32];
    std::snprintf(bound_str, sizeof bound_str, "%.1f",
                  2.0 / std::sqrt(static_cast<Scalar>(m_values[mi])));
    std::cout << "residual-bound  " << (bound_ok ? "PASS" : "FAIL")
              << "  M=" << m_values[mi] << " bound " << bound_str
              << " worst_slack=" << bound_worst_slack[mi] << "\n";
  }
  std::cout << "energy-gap      " << (gap_worst <= 1e-9 ? "PASS" : "FAIL")
            << "  worst_slack=" << gap_worst << "\n";
  std::cout << "convergence     " << (conv_ok ? "PASS" : "FAIL")
            << "  converged=" << converged << "/" << o.instances
            << " hull_err_max=" << hull_worst << "\n";
  std::cout << "over-attraction " << (oa_ok ? "PASS" : "FAIL")
            << "  converged_frac=" << oa.converged_exceed_fraction
            << " damped_frac=" << oa.damped_exceed_fraction << "\n";

  const bool all_ok =
      descent_ok && bound_ok && gap_worst <= 1e-9 && conv_ok && oa_ok;
  return all_ok ? 0 : 2;
}

// --------------------------------------------------------------- stress --

struct StressOpts {
  bench::ScalingConfig cfg;
  std::string out_dir = ".";
};

int cmd_stress(const StressOpts& o) {
  const auto report = bench::scaling_stress(o.cfg);

  const fs::path out(o.out_dir);
  io::write_text_file(out / "scaling.csv", io::scaling_csv(report));
  io::write_text_file(out / "scaling_probes.csv",
                      io::scaling_probes_csv(report));
  io::write_text_file(out / "scaling.json", io::scaling_json(report));
  write_manifest(out, "stress",
                 json{{"stream", to_json(o.cfg.stream)},
                      {"hopfield", to_json(o.cfg.params)},
                      {"adaptor", to_json(o.cfg.adaptor)},
                      {"checkpoints", o.cfg.checkpoints},
                      {"time_ceiling_seconds", o.cfg.time_ceiling_seconds}});

  for (const auto& c : report.checkpoints) {
    std::cout << "checkpoint=" << c.metrics.checkpoint
              << " reliability=" << c.metrics.reliability
              << " generalization=" << c.metrics.generalization
              << " locality=" << c.metrics.locality << " op=" << c.metrics.op
              << " elapsed=" << c.elapsed_seconds << "s"
              << " params=" << c.parameter_count << "\n";
  }
  std::cout << "latency_fit_r2=" << report.latency_fit_r2
            << " latency_ratio_50k_25k=" << report.latency_ratio_50k_25k
            << " total=" << report.total_seconds << "s\n";
  return 0;
}

// ------------------------------------------------------------- codebook --

struct CodebookOpts {
  bench::StreamConfig stream;
  HopfieldParams params;
  AdaptorConfig adaptor;
  std::string in_path;
  std::string out_path;
};

int cmd_codebook_save(const CodebookOpts& o) {
  const auto stream = bench::generate_stream(o.stream);
  Codebook book(o.stream.dim);
  for (const auto& s : stream) {
    apply_edit(book, s.edit_query, s.target, o.params, o.adaptor);
  }
  save_codebook(book, fs::path(o.out_path));
  std::cout << "saved dim=" << book.dim() << " entries=" << book.size()
            << " to " << o.out_path << "\n";
  return 0;
}

int cmd_codebook_load(const CodebookOpts& o) {
  const Codebook book = load_codebook(fs::path(o.in_path));
  std::cout << "loaded dim=" << book.dim() << " entries=" << book.size()
            << " from " << o.in_path << "\n";
  return 0;
}

int cmd_codebook_info(const CodebookOpts& o) {
  const Codebook book = load_codebook(fs::path(o.in_path));
  std::cout << "dim=" << book.dim() << " entries=" << book.size() << "\n";
  if (book.size() == 0) {
    return 0;
  }
  std::map<EntryLabel, int> histogram;
  std::uint64_t created_min = book.entry(0).created_at;
  std::uint64_t created_max = created_min;
  for (Index i = 0; i < book.size(); ++i) {
    const auto& e = book.entry(i);
    ++histogram[e.label];
    created_min = std::min(created_min, e.created_at);
    created_max = std::max(created_max, e.created_at);
  }
  std::cout << "created range: [" << created_min << ", " << created_max
            << "]\n";
  std::vector<std::pair<EntryLabel, int>> rows(histogram.begin(),
                                               histogram.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::cout << "labels (" << rows.size() << " distinct):\n";
  const std::size_t shown = std::min<std::size_t>(rows.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    std::cout << "  " << rows[i].first << " x" << rows[i].second << "\n";
  }
  if (rows.size() > shown) {
    std::cout << "  ... " << rows.size() - shown << " more\n";
  }
  return 0;
}

// ------------------------------------------------------------------ app --

void add_stream_flags(CLI::App* cmd, bench::StreamConfig& s) {
  cmd->add_option("--edits", s.n_edits, "Edits in the synthetic stream")
      ->capture_default_str();
  cmd->add_option("--dim", s.dim, "Vector dimension")->capture_default_str();
  cmd->add_option("--seed", s.seed, "Stream RNG seed")->capture_default_str();
  cmd->add_option("--paraphrase-angle", s.paraphrase_angle,
                  "Max paraphrase rotation (radians)")
      ->capture_default_str();
  cmd->add_flag("--hard-locality", s.hard_locality,
                "Place unrelated queries at a fixed angle from edits");
  cmd->add_option("--locality-angle", s.locality_angle,
                  "Hard-locality angle; 0 = twice the paraphrase angle")
      ->capture_default_str();
  cmd->add_option("--jitter", s.magnitude_jitter,
                  "Query magnitude jitter: scales drawn from [1, 1+jitter]")
      ->capture_default_str();
  cmd->add_option("--reassert-fraction", s.reassert_fraction,
                  "Fraction of edits replaying an earlier edit verbatim")
      ->capture_default_str();
  cmd->add_option("--conflict-fraction", s.conflict_fraction,
                  "Fraction of edits contradicting an earlier edit")
      ->capture_default_str();
}

void add_hopfield_flags(CLI::App* cmd, HopfieldParams& p) {
  cmd->add_option("--beta", p.beta, "Inverse temperature")
      ->capture_default_str();
  cmd->add_option("--gamma", p.gamma, "Damping weight in (0, 1]")
      ->capture_default_str();
  cmd->add_option("--steps", p.max_steps, "Refinement steps M")
      ->capture_default_str();
  cmd->add_option("--epsilon", p.epsilon, "Early-stop residual")
      ->capture_default_str();
  cmd->add_option("--threshold", p.threshold, "Match acceptance cosine c")
      ->capture_default_str();
}

void add_adaptor_flags(CLI::App* cmd, AdaptorConfig& a) {
  cmd->add_option("--lr", a.learning_rate, "Payload learning rate")
      ->capture_default_str();
  cmd->add_option("--adaptor-steps", a.max_steps, "Payload training budget")
      ->capture_default_str();
  cmd->add_option("--loss-threshold", a.loss_threshold,
                  "Payload convergence loss")
      ->capture_default_str();
  cmd->add_option("--patience", a.patience,
                  "Non-improving steps tolerated before stopping")
      ->capture_default_str();
}

void add_out_dir_flag(CLI::App* cmd, std::string& out_dir) {
  cmd->add_option("--out", out_dir, "Output directory (must exist)")
      ->envname("HOREN_OUT_DIR")
      ->capture_default_str()
      ->check(CLI::ExistingDirectory);
}

const std::vector<std::string> kRouterNames = {
    "horen", "cosine-only", "euclidean", "hopfield-unnormalized"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalized key-value codebook with damped Hopfield routing: "
               "benchmarks, sweeps, dynamics checks, persistence."};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "",
                 "Read options from an INI/TOML file (flags override; "
                 "subcommand options go in a [subcommand] section)");
  app.require_subcommand(1);

  int rc = 0;

  BenchOpts bench_opts;
  auto* bench_cmd =
      app.add_subcommand("bench", "Run one lifelong-editing benchmark");
  add_stream_flags(bench_cmd, bench_opts.stream);
  add_hopfield_flags(bench_cmd, bench_opts.params);
  add_adaptor_flags(bench_cmd, bench_opts.adaptor);
  bench_cmd->add_option("--router", bench_opts.router, "Routing variant")
      ->capture_default_str()
      ->check(CLI::IsMember(kRouterNames));
  bench_cmd->add_option("--checkpoints", bench_opts.checkpoints,
                        "Evaluation checkpoints (default: stream end)");
  add_out_dir_flag(bench_cmd, bench_opts.out_dir);
  bench_cmd->callback([&] { rc = cmd_bench(bench_opts); });

  SweepOpts sweep_opts;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Rerun the benchmark along one axis");
  add_stream_flags(sweep_cmd, sweep_opts.base.stream);
  add_hopfield_flags(sweep_cmd, sweep_opts.base.params);
  add_adaptor_flags(sweep_cmd, sweep_opts.base.adaptor);
  sweep_cmd->add_option("--router", sweep_opts.base.router, "Routing variant")
      ->capture_default_str()
      ->check(CLI::IsMember(kRouterNames));
  sweep_cmd
      ->add_option("--axis", sweep_opts.axis,
                   "Swept parameter: steps, gamma, beta, threshold, "
                   "paraphrase-angle")
      ->required()
      ->check(CLI::IsMember({"steps", "gamma", "beta", "threshold",
                             "paraphrase-angle"}));
  sweep_cmd->add_option("--values", sweep_opts.values, "Axis values")
      ->required();
  add_out_dir_flag(sweep_cmd, sweep_opts.base.out_dir);
  sweep_cmd->callback([&] { rc = cmd_sweep(sweep_opts); });

  VerifyOpts verify_opts;
  auto* verify_cmd = app.add_subcommand(
      "verify", "Check energy descent, residual bounds, convergence, and "
                "over-attraction on random instances");
  verify_cmd
      ->add_option("--instances", verify_opts.instances, "Random instances")
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify_opts.seed, "Instance RNG seed")
      ->capture_default_str();
  verify_cmd->add_flag(
      "--naive-softmax", verify_opts.naive_softmax,
      "Debug: recompute energies without max-subtraction at beta=1e6; the "
      "checks must reject the overflowed trace (exits 2)");
  verify_cmd->callback([&] { rc = cmd_verify(verify_opts); });

  StressOpts stress_opts;
  auto* stress_cmd = app.add_subcommand(
      "stress", "Long-horizon growth run with latency probes");
  add_stream_flags(stress_cmd, stress_opts.cfg.stream);
  add_hopfield_flags(stress_cmd, stress_opts.cfg.params);
  add_adaptor_flags(stress_cmd, stress_opts.cfg.adaptor);
  stress_cmd->add_option("--checkpoints", stress_opts.cfg.checkpoints,
                         "Evaluation checkpoints");
  stress_cmd
      ->add_option("--time-ceiling", stress_opts.cfg.time_ceiling_seconds,
                   "Abort when the run exceeds this many seconds")
      ->capture_default_str();
  add_out_dir_flag(stress_cmd, stress_opts.out_dir);
  stress_cmd->callback([&] { rc = cmd_stress(stress_opts); });

  CodebookOpts cb_opts;
  auto* cb_cmd =
      app.add_subcommand("codebook", "Save, load, or inspect a codebook");
  cb_cmd->require_subcommand(1);
  auto* cb_save = cb_cmd->add_subcommand(
      "save", "Build a codebook from a synthetic stream and save it");
  add_stream_flags(cb_save, cb_opts.stream);
  add_hopfield_flags(cb_save, cb_opts.params);
  add_adaptor_flags(cb_save, cb_opts.adaptor);
  cb_save->add_option("--out", cb_opts.out_path, "Output file")->required();
  cb_save->callback([&] { rc = cmd_codebook_save(cb_opts); });
  auto* cb_load = cb_cmd->add_subcommand("load", "Load and summarize a file");
  cb_load->add_option("--in", cb_opts.in_path, "Input file")
      ->required()
      ->check(CLI::ExistingFile);
  cb_load->callback([&] { rc = cmd_codebook_load(cb_opts); });
  auto* cb_info = cb_cmd->add_subcommand(
      "info", "Print dimension, size, label histogram, creation range");
  cb_info->add_option("--in", cb_opts.in_path, "Input file")
      ->required()
      ->check(CLI::ExistingFile);
  cb_info->callback([&] { rc = cmd_codebook_info(cb_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
