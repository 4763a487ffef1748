#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadclean/bspline.hpp"
#include "loadclean/cleanse.hpp"
#include "loadclean/metrics.hpp"
#include "loadclean/pollution.hpp"

namespace loadclean {

struct MethodConfig {
  enum class Kind { portrait, bspline };

  std::string name;
  Kind kind = Kind::portrait;
  PipelineConfig pipeline;  // portrait
  BsplineConfig bspline;    // bspline

  static MethodConfig portrait(Strategy s, bool vld_mode = false);
  static MethodConfig spline(std::size_t df);
};

// Default method list: portrait normal/gamma/iqr plus B-spline at
// df = round(n/60), round(n/45), round(n/30).
std::vector<MethodConfig> default_methods(std::size_t n);
std::vector<std::size_t> default_df_sweep(std::size_t n);

struct MethodResult {
  std::string name;
  std::optional<Metrics> metrics;
  double runtime_seconds = 0.0;          // median over repeats
  std::optional<std::size_t> peak_rss_kib;
  std::string error;                     // non-empty when the method failed
  std::vector<std::size_t> flagged;
};

struct BenchmarkOptions {
  std::size_t repeats = 5;
  // Metrics-only runs may execute methods concurrently; timings are then
  // contended and should not be compared.
  bool parallel = false;
};

struct BenchmarkResult {
  std::size_t series_length = 0;
  PollutionSpec spec;
  std::size_t labeled = 0;
  std::vector<MethodResult> rows;
};

// Flags produced by one method on `s`.
std::vector<std::size_t> run_method(const LoadSeries& s, const MethodConfig& m);

// Pollutes `raw`, runs every method, scores it, and times it.
BenchmarkResult benchmark(const LoadSeries& raw, const PollutionSpec& spec,
                          std::span<const MethodConfig> methods, const BenchmarkOptions& opt = {});

// Same, on an already polluted series with known labels.
BenchmarkResult benchmark_labeled(const LoadSeries& polluted, const std::vector<bool>& labels,
                                  std::span<const MethodConfig> methods,
                                  const BenchmarkOptions& opt = {});

std::string bench_to_json(const BenchmarkResult& r);
std::string bench_table(const BenchmarkResult& r);

// Peak resident set of this process in KiB, from /proc; nullopt when the
// counters are not available. reset_peak_rss() returns false if the kernel
// refuses the reset.
std::optional<std::size_t> peak_rss_kib();
bool reset_peak_rss();

}  // namespace loadclean
