#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "loadclean/pollution.hpp"
#include "loadclean/series.hpp"
#include "loadclean/synthetic.hpp"
#include "loadclean/tools/artifacts.hpp"
#include "loadclean/tools/cli.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("loadclean-it-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Month of hourly load with spikes and dropped samples but no gaps, so
// nothing is marked missing.
inline loadclean::PollutedSeries spiky_month(std::uint64_t seed = 42) {
  loadclean::PollutionSpec spec;
  spec.rng_seed = seed;
  spec.weights = {0.5, 0.3, 0.2, 0.0};
  return loadclean::pollute(loadclean::canonical_benchmark(31, seed), spec);
}

inline std::filesystem::path write_series(const TempDir& dir, const std::string& name, const loadclean::LoadSeries& s) {
  const auto p = dir / name;
  loadclean::tools::write_file(p, loadclean::serialize_series(s));
  return p;
}

struct CliRun {
  int status = 0;
  std::string out;
  std::string err;
};

inline CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.status = loadclean::tools::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace fixtures
