#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "horen/bench.hpp"

namespace horen::io {

// Text renderings of benchmark reports. CSV columns are stable; JSON mirrors
// the structs field for field. Floating-point values round-trip exactly.

std::string metrics_csv(const bench::MetricsReport& report);
std::string metrics_json(const bench::MetricsReport& report);

std::string sweep_csv(const bench::SweepReport& report);
std::string sweep_json(const bench::SweepReport& report);

std::string scaling_csv(const bench::ScalingReport& report);
std::string scaling_probes_csv(const bench::ScalingReport& report);
std::string scaling_json(const bench::ScalingReport& report);

/// Writes text to path, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace horen::io
