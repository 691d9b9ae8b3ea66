#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int status = -1;
  std::string output;  // stdout and stderr interleaved

  bool contains(const std::string& needle) const {
    return output.find(needle) != std::string::npos;
  }
};

RunResult run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + HOREN_CLI_PATH + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  std::array<char, 4096> buf;
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    result.output.append(buf.data(), got);
  }
  const int rc = pclose(pipe);
  result.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return result;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("horen_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t lines = 0;
  for (const char c : text) {
    lines += c == '\n' ? 1 : 0;
  }
  return lines;
}

constexpr const char* kMetricsHeader =
    "checkpoint,reliability,generalization,locality,op,"
    "mean_locality_displacement";

}  // namespace

TEST_CASE("bench writes its three outputs and reports success") {
  const fs::path dir = fresh_dir("bench");
  const RunResult r =
      run_cli("bench --edits 10 --dim 16 --out " + dir.string());
  CHECK(r.status == 0);
  CHECK(r.contains("metrics.csv"));
  CHECK(fs::exists(dir / "metrics.csv"));
  CHECK(fs::exists(dir / "metrics.json"));
  CHECK(fs::exists(dir / "manifest.json"));

  const std::string csv = slurp(dir / "metrics.csv");
  CHECK(csv.rfind(kMetricsHeader, 0) == 0);
  CHECK(csv.find("\n10,") != std::string::npos);  // final checkpoint row
}

TEST_CASE("bench reruns are byte identical") {
  const fs::path a = fresh_dir("bench_a");
  const fs::path b = fresh_dir("bench_b");
  const std::string args = "bench --edits 15 --dim 16 --jitter 0.5 --out ";
  CHECK(run_cli(args + a.string()).status == 0);
  CHECK(run_cli(args + b.string()).status == 0);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(a / "metrics.json") == slurp(b / "metrics.json"));
}

TEST_CASE("a missing output directory is a usage error") {
  const RunResult r =
      run_cli("bench --edits 5 --out /horen_no_such_dir_anywhere");
  CHECK(r.status == 1);
  CHECK(r.contains("horen_no_such_dir_anywhere"));
}

TEST_CASE("config files feed flags, and explicit flags win") {
  const fs::path dir = fresh_dir("config");
  const fs::path cfg = dir / "run.ini";
  {
    std::ofstream out(cfg);
    out << "[bench]\nedits=12\ndim=16\n";
  }
  const fs::path out_a = fresh_dir("config_a");
  const RunResult a = run_cli("--config " + cfg.string() + " bench --out " +
                              out_a.string());
  CHECK(a.status == 0);
  CHECK(slurp(out_a / "metrics.csv").find("\n12,") != std::string::npos);

  const fs::path out_b = fresh_dir("config_b");
  const RunResult b = run_cli("--config " + cfg.string() +
                              " bench --edits 5 --out " + out_b.string());
  CHECK(b.status == 0);
  CHECK(slurp(out_b / "metrics.csv").find("\n5,") != std::string::npos);
}

TEST_CASE("sweep emits one row per axis value") {
  const fs::path dir = fresh_dir("sweep");
  const RunResult r = run_cli(
      "sweep --axis steps --values 0 1 2 4 8 --edits 40 --dim 16 --out " +
      dir.string());
  CHECK(r.status == 0);
  const std::string csv = slurp(dir / "sweep.csv");
  CHECK(line_count(csv) == 6);  // header + five points
  CHECK(csv.find("steps,0") != std::string::npos);
  CHECK(csv.find("steps,8") != std::string::npos);
  CHECK(fs::exists(dir / "sweep.json"));
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("an unknown sweep axis lists the valid ones") {
  const fs::path dir = fresh_dir("sweep_bad");
  const RunResult r =
      run_cli("sweep --axis sideways --values 1 --out " + dir.string());
  CHECK(r.status == 1);
  CHECK(r.contains("steps"));
  CHECK(r.contains("gamma"));
}

TEST_CASE("verify passes on random instances") {
  const RunResult r = run_cli("verify --instances 40 --seed 7");
  CHECK(r.status == 0);
  CHECK(r.contains("descent"));
  CHECK(r.contains("PASS"));
  CHECK(r.contains("bound 1.0"));
  CHECK_FALSE(r.contains("FAIL"));
}

TEST_CASE("verify with a naive softmax overflows and is caught") {
  const RunResult r = run_cli("verify --naive-softmax --instances 5");
  CHECK(r.status == 2);
  CHECK(r.contains("harness-sanity FAIL"));
}

TEST_CASE("codebooks save, reload, summarize, and reject corruption") {
  const fs::path dir = fresh_dir("codebook");
  const fs::path file = dir / "book.horen";
  const RunResult saved = run_cli("codebook save --edits 25 --dim 8 --out " +
                                  file.string());
  CHECK(saved.status == 0);
  CHECK(saved.contains("saved dim=8 entries=25"));

  const RunResult loaded = run_cli("codebook load --in " + file.string());
  CHECK(loaded.status == 0);
  CHECK(loaded.contains("loaded dim=8 entries=25"));

  const RunResult info = run_cli("codebook info --in " + file.string());
  CHECK(info.status == 0);
  CHECK(info.contains("dim=8 entries=25"));
  CHECK(info.contains("fact-0"));
  CHECK(info.contains("created range: [0, 24]"));

  const fs::path broken = dir / "broken.horen";
  {
    const std::string bytes = slurp(file).substr(0, 30);
    std::ofstream out(broken, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  const RunResult bad = run_cli("codebook load --in " + broken.string());
  CHECK(bad.status == 1);
  CHECK(bad.contains("truncated file"));

  const RunResult missing =
      run_cli("codebook load --in " + (dir / "missing.horen").string());
  CHECK(missing.status == 1);
}

TEST_CASE("a small stress run writes scaling reports") {
  const fs::path dir = fresh_dir("stress");
  const RunResult r = run_cli(
      "stress --edits 1200 --dim 16 --checkpoints 1000 1200 --out " +
      dir.string());
  CHECK(r.status == 0);
  CHECK(r.contains("latency_fit_r2"));
  CHECK(fs::exists(dir / "scaling.csv"));
  CHECK(fs::exists(dir / "scaling_probes.csv"));
  CHECK(fs::exists(dir / "scaling.json"));
  const std::string csv = slurp(dir / "scaling.csv");
  CHECK(line_count(csv) == 3);  // header + two checkpoints
}

TEST_CASE("top-level usage surfaces cleanly") {
  CHECK(run_cli("--help").status == 0);
  CHECK(run_cli("--help").contains("bench"));
  const RunResult version = run_cli("--version");
  CHECK(version.status == 0);
  CHECK(version.contains("1.0.0"));
  CHECK(run_cli("").status == 1);              // a subcommand is required
  CHECK(run_cli("frobnicate").status == 1);    // unknown subcommand
  CHECK(run_cli("bench --edits 0 --out /tmp").status == 1);  // invalid config
}
