#include "loadclean/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include "json.hpp"
#include "loadclean/error.hpp"

namespace loadclean {

MethodConfig MethodConfig::portrait(Strategy s, bool vld_mode) {
  MethodConfig m;
  m.kind = Kind::portrait;
  m.name = std::string("portrait-") + std::string(to_string(s)) + (vld_mode ? "-vld" : "");
  m.pipeline.detection.strategy = s;
  m.pipeline.vld_mode = vld_mode;
  return m;
}

MethodConfig MethodConfig::spline(std::size_t df) {
  MethodConfig m;
  m.kind = Kind::bspline;
  m.name = "bspline-df" + std::to_string(df);
  m.bspline.df = df;
  return m;
}

std::vector<std::size_t> default_df_sweep(std::size_t n) {
  std::vector<std::size_t> out;
  for (double d : {60.0, 45.0, 30.0}) {
    out.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(n) / d)));
  }
  return out;
}

std::vector<MethodConfig> default_methods(std::size_t n) {
  std::vector<MethodConfig> m = {MethodConfig::portrait(Strategy::normal),
                                 MethodConfig::portrait(Strategy::gamma),
                                 MethodConfig::portrait(Strategy::iqr)};
  for (auto df : default_df_sweep(n)) m.push_back(MethodConfig::spline(df));
  return m;
}

std::vector<std::size_t> run_method(const LoadSeries& s, const MethodConfig& m) {
  if (m.kind == MethodConfig::Kind::bspline) return bspline_detect(s, m.bspline);
  return run_pipeline(s, m.pipeline).report.flagged_indices();
}

std::optional<std::size_t> peak_rss_kib() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream ss(line.substr(6));
      std::size_t kib = 0;
      if (ss >> kib) return kib;
    }
  }
  return std::nullopt;
}

bool reset_peak_rss() {
  std::FILE* f = std::fopen("/proc/self/clear_refs", "w");
  if (!f) return false;
  const bool ok = std::fputs("5", f) >= 0;
  return std::fclose(f) == 0 && ok;
}

namespace {

MethodResult run_one(const LoadSeries& s, const std::vector<bool>& labels, const MethodConfig& m,
                     std::size_t repeats, bool measure_memory) {
  MethodResult r;
  r.name = m.name;
  const bool rss = measure_memory && reset_peak_rss();
  try {
    std::vector<double> times;
    for (std::size_t k = 0; k < std::max<std::size_t>(repeats, 1); ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      r.flagged = run_method(s, m);
      times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    r.runtime_seconds = times[(times.size() - 1) / 2];
    r.metrics = score(labels, r.flagged);
  } catch (const Error& e) {
    r.error = e.what();
  }
  if (rss) r.peak_rss_kib = peak_rss_kib();
  return r;
}

}  // namespace

BenchmarkResult benchmark_labeled(const LoadSeries& polluted, const std::vector<bool>& labels,
                                  std::span<const MethodConfig> methods,
                                  const BenchmarkOptions& opt) {
  if (methods.empty()) throw InvalidInput("bench: at least one method is required");
  if (labels.size() != polluted.size()) throw InvalidInput("bench: labels do not match the series");
  BenchmarkResult res;
  res.series_length = polluted.size();
  res.labeled = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (opt.parallel) {
    std::vector<std::future<MethodResult>> jobs;
    for (const auto& m : methods) {
      jobs.push_back(std::async(std::launch::async, [&, m] { return run_one(polluted, labels, m, 1, false); }));
    }
    for (auto& j : jobs) res.rows.push_back(j.get());
  } else {
    for (const auto& m : methods) res.rows.push_back(run_one(polluted, labels, m, opt.repeats, true));
  }
  return res;
}

BenchmarkResult benchmark(const LoadSeries& raw, const PollutionSpec& spec,
                          std::span<const MethodConfig> methods, const BenchmarkOptions& opt) {
  const PollutedSeries p = pollute(raw, spec);
  BenchmarkResult res = benchmark_labeled(p.series, p.labels, methods, opt);
  res.spec = spec;
  return res;
}

std::string bench_to_json(const BenchmarkResult& r) {
  using nlohmann::json;
  json j;
  j["series_length"] = r.series_length;
  j["labeled"] = r.labeled;
  j["pollution"] = {{"fraction", r.spec.fraction},
                    {"weights",
                     {{"scale_spike", r.spec.weights[0]},
                      {"absolute_replace", r.spec.weights[1]},
                      {"drop_to_zero", r.spec.weights[2]},
                      {"consecutive_gap", r.spec.weights[3]}}},
                    {"gap_length_range", {r.spec.gap_min, r.spec.gap_max}},
                    {"rng_seed", r.spec.rng_seed}};
  json rows = json::array();
  for (const auto& m : r.rows) {
    json row = {{"method", m.name}, {"runtime_seconds", m.runtime_seconds}};
    row["peak_rss_kib"] = m.peak_rss_kib ? json(*m.peak_rss_kib) : json("unavailable");
    if (m.metrics) {
      const Metrics& x = *m.metrics;
      row["tp"] = x.tp;
      row["fp"] = x.fp;
      row["tn"] = x.tn;
      row["fn"] = x.fn;
      row["accuracy"] = x.accuracy;
      row["precision"] = x.precision;
      row["recall"] = x.recall;
      row["f_measure"] = x.f_measure;
      if (!x.note.empty()) row["note"] = x.note;
    }
    if (!m.error.empty()) row["error"] = m.error;
    rows.push_back(std::move(row));
  }
  j["methods"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string bench_table(const BenchmarkResult& r) {
  std::vector<std::vector<std::string>> cells = {
      {"method", "accuracy", "precision", "recall", "F", "runtime_s", "peak_rss_kib"}};
  auto f4 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (const auto& m : r.rows) {
    std::vector<std::string> row = {m.name};
    if (m.metrics) {
      for (double v : {m.metrics->accuracy, m.metrics->precision, m.metrics->recall, m.metrics->f_measure}) {
        row.push_back(f4(v));
      }
    } else {
      for (int k = 0; k < 4; ++k) row.push_back("failed");
    }
    row.push_back(f4(m.runtime_seconds));
    row.push_back(m.peak_rss_kib ? std::to_string(*m.peak_rss_kib) : "unavailable");
    cells.push_back(std::move(row));
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      out += c == 0 ? row[c] + pad : "  " + pad + row[c];
    }
    out += '\n';
  }
  for (const auto& m : r.rows) {
    if (!m.error.empty()) out += m.name + ": " + m.error + "\n";
  }
  return out;
}

}  // namespace loadclean
