#include "horen/report_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace horen::io {

namespace {

using nlohmann::json;

std::ostringstream csv_stream() {
  std::ostringstream out;
  out << std::setprecision(17);
  return out;
}

void append_metrics_row(std::ostringstream& out,
                        const bench::CheckpointMetrics& m) {
  out << m.checkpoint << ',' << m.reliability << ',' << m.generalization
      << ',' << m.locality << ',' << m.op << ','
      << m.mean_locality_displacement << '\n';
}

json to_json(const bench::CheckpointMetrics& m) {
  return json{{"checkpoint", m.checkpoint},
              {"reliability", m.reliability},
              {"generalization", m.generalization},
              {"locality", m.locality},
              {"op", m.op},
              {"mean_locality_displacement", m.mean_locality_displacement}};
}

json to_json(const bench::MetricsReport& r) {
  json per = json::array();
  for (const auto& m : r.per_checkpoint) {
    per.push_back(to_json(m));
  }
  return json{{"reliability", r.reliability},
              {"generalization", r.generalization},
              {"locality", r.locality},
              {"op", r.op},
              {"mean_locality_displacement", r.mean_locality_displacement},
              {"inserted", r.inserted},
              {"refined", r.refined},
              {"conflict_inserted", r.conflict_inserted},
              {"per_checkpoint", per}};
}

}  // namespace

std::string metrics_csv(const bench::MetricsReport& report) {
  auto out = csv_stream();
  out << "checkpoint,reliability,generalization,locality,op,"
         "mean_locality_displacement\n";
  for (const auto& m : report.per_checkpoint) {
    append_metrics_row(out, m);
  }
  return out.str();
}

std::string metrics_json(const bench::MetricsReport& report) {
  return to_json(report).dump(2) + "\n";
}

std::string sweep_csv(const bench::SweepReport& report) {
  auto out = csv_stream();
  out << "axis,value,reliability,generalization,locality,op,"
         "mean_locality_displacement,inserted,refined,conflict_inserted\n";
  for (const auto& p : report.points) {
    out << bench::to_string(report.axis) << ',' << p.value << ','
        << p.report.reliability << ',' << p.report.generalization << ','
        << p.report.locality << ',' << p.report.op << ','
        << p.report.mean_locality_displacement << ',' << p.report.inserted
        << ',' << p.report.refined << ',' << p.report.conflict_inserted
        << '\n';
  }
  return out.str();
}

std::string sweep_json(const bench::SweepReport& report) {
  json points = json::array();
  for (const auto& p : report.points) {
    points.push_back(json{{"value", p.value}, {"report", to_json(p.report)}});
  }
  return json{{"axis", bench::to_string(report.axis)}, {"points", points}}
             .dump(2) +
         "\n";
}

std::string scaling_csv(const bench::ScalingReport& report) {
  auto out = csv_stream();
  out << "checkpoint,reliability,generalization,locality,op,"
         "mean_locality_displacement,elapsed_seconds,parameter_count\n";
  for (const auto& c : report.checkpoints) {
    out << c.metrics.checkpoint << ',' << c.metrics.reliability << ','
        << c.metrics.generalization << ',' << c.metrics.locality << ','
        << c.metrics.op << ',' << c.metrics.mean_locality_displacement << ','
        << c.elapsed_seconds << ',' << c.parameter_count << '\n';
  }
  return out.str();
}

std::string scaling_probes_csv(const bench::ScalingReport& report) {
  auto out = csv_stream();
  out << "entries,seconds_per_query\n";
  for (const auto& p : report.probes) {
    out << p.entries << ',' << p.seconds_per_query << '\n';
  }
  return out.str();
}

std::string scaling_json(const bench::ScalingReport& report) {
  json checkpoints = json::array();
  for (const auto& c : report.checkpoints) {
    checkpoints.push_back(json{{"metrics", to_json(c.metrics)},
                               {"elapsed_seconds", c.elapsed_seconds},
                               {"parameter_count", c.parameter_count}});
  }
  json probes = json::array();
  for (const auto& p : report.probes) {
    probes.push_back(json{{"entries", p.entries},
                          {"seconds_per_query", p.seconds_per_query}});
  }
  return json{{"checkpoints", checkpoints},
              {"probes", probes},
              {"latency_fit_r2", report.latency_fit_r2},
              {"latency_ratio_50k_25k", report.latency_ratio_50k_25k},
              {"total_seconds", report.total_seconds},
              {"final_entries", report.final_entries}}
             .dump(2) +
         "\n";
}

void write_text_file(const std::filesystem::path& path,
                     std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory " + path.parent_path().string() +
                    ": " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

}  // namespace horen::io
