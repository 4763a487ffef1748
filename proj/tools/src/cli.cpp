#include "loadclean/tools/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "loadclean/bench.hpp"
#include "loadclean/error.hpp"
#include "loadclean/pollution.hpp"
#include "loadclean/report_json.hpp"
#include "loadclean/spectral.hpp"
#include "loadclean/stationarity.hpp"
#include "loadclean/synthetic.hpp"
#include "loadclean/tools/artifacts.hpp"
#include "loadclean/tools/config_file.hpp"
#include "loadclean/tools/review.hpp"
#include "loadclean/tools/svg.hpp"

namespace loadclean::tools {

using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

ColumnRef column_ref(const std::string& s) {
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) return std::stoul(s);
  return s;
}

struct IngestOptions {
  std::string input;
  std::string timestamp_column = "0";
  std::string value_column = "1";
  bool no_header = false;
  std::vector<std::string> missing_tokens;
  double missing_default = 0.0;
  char delimiter = ',';
  std::int64_t interval = 0;
  std::size_t period = 0;

  void add(CLI::App* app, bool input_required = true) {
    auto* in = app->add_option("input,--input", input, "Input CSV (timestamp, value)");
    if (input_required) in->required();
    app->add_option("--timestamp-column", timestamp_column, "Timestamp column name or 0-based index");
    app->add_option("--value-column", value_column, "Value column name or 0-based index");
    app->add_flag("--no-header", no_header, "Input has no header row");
    app->add_option("--missing-token", missing_tokens, "Value text treated as missing (repeatable)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app->add_option("--missing-default", missing_default, "Value stored in missing samples before detection");
    app->add_option("--delimiter", delimiter, "Field delimiter");
    app->add_option("--interval", interval, "Sampling interval in seconds (inferred by default)");
  }

  void add_period(CLI::App* app) {
    app->add_option("--period", period, "Period in samples (skips spectral detection)")->check(CLI::PositiveNumber);
  }

  IngestConfig config() const {
    IngestConfig c;
    c.timestamp_column = column_ref(timestamp_column);
    c.value_column = column_ref(value_column);
    c.has_header = !no_header;
    if (!missing_tokens.empty()) c.missing_tokens = missing_tokens;
    c.default_missing_value = missing_default;
    c.delimiter = delimiter;
    if (interval > 0) c.interval = interval;
    c.meta = input;
    return c;
  }

  // Parsed input with missing samples set to the default value.
  LoadSeries load() const {
    return fill_missing_defaults(parse_series(read_file(input), config()), missing_default);
  }

  PeriodInfo period_of(const LoadSeries& s) const {
    return period > 0 ? PeriodInfo::from_samples(period, s) : fundamental_period(s);
  }
};

struct DetectOptions {
  std::string strategy = "normal";
  double alpha = 0.05;
  double rho = 1.5;
  double sigma_scale = 1.4826;
  bool gamma_fallback = false;
  double threshold = 0.0;
  bool auto_threshold = false;
  bool normalized = false;
  bool vld = false;
  double vld_threshold = 0.0;

  void add(CLI::App* app) {
    app->add_option("--strategy", strategy, "Detection strategy")
        ->check(CLI::IsMember({"normal", "gamma", "iqr"}));
    app->add_option("--alpha", alpha, "Confidence coefficient for normal and gamma");
    app->add_option("--rho", rho, "IQR multiplier");
    app->add_option("--sigma-scale", sigma_scale, "MAD to sigma factor");
    app->add_flag("--gamma-fallback", gamma_fallback, "Use the normal detector where gamma is inapplicable");
    auto* fixed = app->add_option("--threshold", threshold, "Fixed similarity threshold for VPDs");
    app->add_flag("--auto-threshold", auto_threshold, "Select the VPD threshold by elbow scan (default)")
        ->excludes(fixed);
    app->add_flag("--normalized", normalized, "Scale characteristic vectors by their spread before comparing");
    app->add_flag("--vld", vld, "Group periods into virtual landscapes first");
    app->add_option("--vld-threshold", vld_threshold, "Fixed similarity threshold for VLDs");
  }

  PipelineConfig pipeline(const IngestOptions& in) const {
    PipelineConfig c;
    c.ingest = in.config();
    c.missing_sentinel = in.missing_default;
    if (in.period > 0) c.period_samples = in.period;
    if (threshold > 0 && !auto_threshold) c.threshold = ThresholdChoice::at(threshold);
    c.normalized_similarity = normalized;
    c.vld_mode = vld;
    if (vld_threshold > 0) c.vld_threshold = ThresholdChoice::at(vld_threshold);
    c.detection.strategy = parse_strategy(strategy);
    c.detection.alpha = alpha;
    c.detection.rho = rho;
    c.detection.sigma_scale = sigma_scale;
    c.detection.gamma_fallback_to_normal = gamma_fallback;
    return c;
  }
};

struct PolicyOptions {
  std::string missing_policy = "portrait-median";
  std::string aberrant_policy = "portrait-median";

  void add(CLI::App* app) {
    const auto names = CLI::IsMember({"portrait-median", "portrait-mean", "gamma-mean", "leave"});
    app->add_option("--missing-policy", missing_policy, "Replacement for missing samples")->check(names);
    app->add_option("--aberrant-policy", aberrant_policy, "Replacement for confirmed outliers")->check(names);
  }

  ReplacementPolicy policy(bool require_confirmation) const {
    ReplacementPolicy p;
    p.missing_policy = parse_policy(missing_policy);
    p.aberrant_policy = parse_policy(aberrant_policy);
    p.require_confirmation = require_confirmation;
    return p;
  }
};

void print_warnings(std::ostream& err, const std::vector<std::string>& w) {
  for (const auto& m : w) err << "warning: " << m << '\n';
}

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file(path, text);
  }
}

json scan_json(const ThresholdScan& s) {
  json md = json::array();
  for (double d : s.mean_distances) md.push_back(number_or_null(d));
  json curve = json::array();
  for (const auto& [n, v] : s.elbow_curve) curve.push_back({{"n", n}, {"second_difference", number_or_null(v)}});
  return {{"thresholds", s.thresholds},
          {"cluster_counts", s.cluster_counts},
          {"mean_distances", md},
          {"selected_index", s.selected_index},
          {"selected_threshold", s.thresholds.empty() ? json(nullptr) : json(s.selected_threshold())},
          {"selected_count", s.cluster_counts.empty() ? json(nullptr) : json(s.selected_count())},
          {"degenerate", s.degenerate},
          {"low_confidence", s.low_confidence},
          {"elbow_curve", curve}};
}

json period_json(const PeriodInfo& p) {
  return {{"period_samples", p.period_samples},
          {"period_seconds", p.period_seconds},
          {"fundamental_frequency_hz", p.fundamental_frequency_hz},
          {"confidence", number_or_null(p.confidence)},
          {"raw_period_samples", number_or_null(p.raw_period_samples)},
          {"num_full_periods", p.num_full_periods},
          {"warnings", p.warnings}};
}

SimilarityMetric metric_for(bool normalized, std::span<const PortraitSet> sets) {
  if (!normalized) return {};
  std::vector<CharacteristicVector> chars;
  for (const auto& p : sets) chars.push_back(p.chars);
  return SimilarityMetric::normalized(chars);
}

// --- subcommands ---------------------------------------------------------

struct PeriodCmd {
  IngestOptions in;
  std::size_t trials = 0;
  double min_window_days = 30;
  std::uint64_t seed = 42;
  std::string output;

  void add(CLI::App* app) {
    in.add(app);
    app->add_option("--sensitivity-trials", trials, "Random windows for the sensitivity study");
    app->add_option("--min-window-days", min_window_days, "Shortest window in days");
    app->add_option("--seed", seed, "Seed for the sensitivity study");
    app->add_option("-o,--output", output, "Write JSON here instead of standard output");
  }

  int run(std::ostream& out, std::ostream& err) const {
    const LoadSeries s = in.load();
    const PeriodInfo p = fundamental_period(s);
    print_warnings(err, p.warnings);
    json j = period_json(p);
    if (trials > 0) {
      const auto st = period_sensitivity(s, trials, static_cast<std::int64_t>(min_window_days * 86400.0), seed);
      j["sensitivity"] = {{"trials", st.trials},
                          {"skipped", st.skipped},
                          {"mean_period_seconds", number_or_null(st.mean_period_seconds)},
                          {"variance_seconds2", number_or_null(st.variance_seconds2)}};
    }
    emit(out, output, j.dump(2) + "\n");
    return kExitOk;
  }
};

struct PortraitCmd {
  IngestOptions in;
  double threshold = 0.0;
  bool normalized = false;
  std::string output;
  std::string plot;

  void add(CLI::App* app) {
    in.add(app);
    in.add_period(app);
    app->add_option("--threshold", threshold, "Fixed similarity threshold (elbow scan by default)");
    app->add_flag("--normalized", normalized, "Scale characteristic vectors by their spread before comparing");
    app->add_option("-o,--output", output, "Write JSON here instead of standard output");
    app->add_option("--plot", plot, "Write the threshold-scan curve as SVG");
  }

  int run(std::ostream& out, std::ostream& err) const {
    const LoadSeries s = in.load();
    const PeriodInfo p = in.period_of(s);
    print_warnings(err, p.warnings);
    const auto bpds = build_bpds(s, p);
    const auto metric = metric_for(normalized, bpds);
    const auto choice = threshold > 0 ? ThresholdChoice::at(threshold) : ThresholdChoice::automatic();
    const VpdResult r = build_vpds(s, p, choice, metric);
    json jb = json::array();
    for (const auto& b : r.bpds) {
      jb.push_back({{"slot", b.slots.front()}, {"theta", b.chars.theta}, {"mad", b.chars.mad}, {"size", b.size()}});
    }
    json jv = json::array();
    for (const auto& v : r.vpds) {
      jv.push_back({{"slot_indices", v.slots}, {"theta", v.chars.theta}, {"mad", v.chars.mad}, {"size", v.size()}});
    }
    json j{{"period_samples", p.period_samples},
           {"threshold", r.threshold},
           {"bpds", jb},
           {"vpds", jv},
           {"scan", r.scan ? scan_json(*r.scan) : json(nullptr)}};
    if (r.scan && r.scan->low_confidence) err << "warning: threshold selection is low-confidence\n";
    if (!plot.empty() && r.scan) write_file(plot, threshold_scan_svg(*r.scan, "VPD threshold scan"));
    emit(out, output, j.dump(2) + "\n");
    return kExitOk;
  }
};

struct SegmentCmd {
  IngestOptions in;
  double threshold = 0.0;
  std::string output;
  std::string plot;

  void add(CLI::App* app) {
    in.add(app);
    in.add_period(app);
    app->add_option("--vld-threshold", threshold, "Fixed similarity threshold (elbow scan by default)");
    app->add_option("-o,--output", output, "Write JSON here instead of standard output");
    app->add_option("--plot", plot, "Write the threshold-scan curve as SVG");
  }

  int run(std::ostream& out, std::ostream& err) const {
    const LoadSeries s = in.load();
    const PeriodInfo p = in.period_of(s);
    print_warnings(err, p.warnings);
    const Segmentation seg = segment_periods(s, p);
    const auto choice = threshold > 0 ? ThresholdChoice::at(threshold) : ThresholdChoice::automatic();
    const VldResult r = build_vlds(s, seg.blocks, choice);
    json jv = json::array();
    for (const auto& v : r.vlds) {
      jv.push_back({{"member_periods", v.member_periods}, {"theta", v.chars.theta}, {"mad", v.chars.mad}});
    }
    json tail = nullptr;
    if (seg.tail) {
      tail = {{"period_index", seg.tail->period_index}, {"begin", seg.tail->begin}, {"end", seg.tail->end}};
    }
    json j{{"period_samples", p.period_samples},
           {"periods", seg.blocks.size()},
           {"threshold", r.threshold},
           {"vlds", jv},
           {"tail", tail},
           {"scan", r.scan ? scan_json(*r.scan) : json(nullptr)}};
    if (r.scan && r.scan->low_confidence) err << "warning: threshold selection is low-confidence\n";
    if (!plot.empty() && r.scan) write_file(plot, threshold_scan_svg(*r.scan, "VLD threshold scan"));
    emit(out, output, j.dump(2) + "\n");
    return kExitOk;
  }
};

PipelineResult detect_only(const IngestOptions& in, const DetectOptions& det) {
  PipelineConfig cfg = det.pipeline(in);
  cfg.policy.require_confirmation = true;
  return run_pipeline(read_file(in.input), cfg);
}

std::unique_ptr<bool[]> flag_mask(const DetectionReport& r) {
  auto m = std::make_unique<bool[]>(r.series_length);
  for (const auto& f : r.flags) m[f.index] = true;
  return m;
}

void report_diagnostics(std::ostream& err, const PipelineResult& res) {
  print_warnings(err, res.period.warnings);
  print_warnings(err, res.layout.warnings);
  print_warnings(err, res.report.warnings);
  if (res.scan && res.scan->low_confidence) err << "warning: threshold selection is low-confidence\n";
  for (const auto& g : res.report.groups) {
    if (g.skipped) err << "warning: group " << g.id << " skipped: " << g.skip_reason << '\n';
  }
}

struct DetectCmd {
  IngestOptions in;
  DetectOptions det;
  std::string report = "report.json";
  std::string flagged_csv;
  std::string plot;

  void add(CLI::App* app) {
    in.add(app);
    in.add_period(app);
    det.add(app);
    app->add_option("--report", report, "Report JSON path");
    app->add_option("--flagged-csv", flagged_csv, "Write the input with a flag column");
    app->add_option("--plot", plot, "Write the series with flags as SVG");
  }

  int run(std::ostream& out, std::ostream& err) const {
    const PipelineResult res = detect_only(in, det);
    report_diagnostics(err, res);
    emit(out, report, report_to_json(res.report));
    if (!flagged_csv.empty()) {
      const auto mask = flag_mask(res.report);
      write_file(flagged_csv, serialize_series(res.input, std::span<const bool>(mask.get(), res.report.series_length)));
    }
    if (!plot.empty()) {
      const auto idx = res.report.flagged_indices();
      write_file(plot, series_svg(res.input, idx, in.input + ": " + std::to_string(idx.size()) + " flags"));
    }
    err << res.report.flags.size() << " flags";
    if (report != "-") err << "; report written to " << report;
    err << '\n';
    return kExitOk;
  }
};

std::vector<Decision> load_decisions(const std::string& path) {
  std::vector<Decision> out;
  std::istringstream ss(read_file(path));
  std::string line;
  while (std::getline(ss, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(decision_from_json(line));
  }
  return out;
}

struct CleanseCmd {
  IngestOptions in;
  DetectOptions det;
  PolicyOptions pol;
  bool require_confirmation = false;
  std::string decisions;
  std::string out_dir = ".";
  std::string cleansed_name = "cleansed.csv";
  std::string missing_token_out = "NA";

  void add(CLI::App* app) {
    in.add(app);
    in.add_period(app);
    det.add(app);
    pol.add(app);
    app->add_flag("--require-confirmation", require_confirmation,
                  "Leave flags for review instead of replacing them");
    app->add_option("--decisions", decisions, "JSON lines of keep/replace decisions");
    app->add_option("--out-dir", out_dir, "Directory for cleansed CSV, report.json and audit.jsonl");
    app->add_option("--cleansed-name", cleansed_name, "File name of the cleansed CSV");
    app->add_option("--missing-token-out", missing_token_out, "Text written for samples that stay missing");
  }

  int run(std::ostream&, std::ostream& err) const {
    const auto policy = pol.policy(require_confirmation);
    policy.validate(parse_strategy(det.strategy));
    const PipelineResult res = detect_only(in, det);
    report_diagnostics(err, res);
    const std::filesystem::path dir(out_dir);
    write_file(dir / "report.json", report_to_json(res.report));
    const std::vector<Decision> ds = decisions.empty() ? std::vector<Decision>{} : load_decisions(decisions);
    if (require_confirmation) {
      std::size_t decided = 0;
      for (const auto& f : res.report.flags) {
        for (const auto& d : ds) decided += d.index == f.index;
      }
      if (decided < res.report.flags.size()) {
        err << res.report.flags.size() << " flags await confirmation; run `loadclean review --report "
            << (dir / "report.json").string() << ' ' << in.input << "`\n";
        return kExitOk;
      }
    }
    const CleanseResult c = cleanse(res.input, res.report, ds, policy);
    print_warnings(err, c.warnings);
    write_file(dir / cleansed_name, cleansed_csv(c, missing_token_out));
    write_file(dir / "audit.jsonl", audit_to_jsonl(c.audit));
    err << res.report.flags.size() << " flags, " << c.audit.size() << " audit rows; outputs in " << dir.string()
        << '\n';
    return kExitOk;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  return out;
}

struct BenchCmd {
  IngestOptions in;
  std::size_t synthetic_periods = 0;
  std::uint64_t synthetic_seed = 42;
  std::uint64_t pollute_seed = 42;
  double fraction = 0.05;
  std::string methods;
  std::string df_sweep;
  std::size_t repeats = 5;
  bool parallel = false;
  std::string out_dir = ".";
  bool plots = false;

  void add(CLI::App* app) {
    in.add(app, false);
    in.add_period(app);
    app->add_option("--synthetic-periods", synthetic_periods,
                    "Benchmark on a generated hourly series of this many days instead of an input file");
    app->add_option("--synthetic-seed", synthetic_seed, "Seed of the generated series");
    app->add_option("--pollute-seed", pollute_seed, "Seed of the pollution");
    app->add_option("--fraction", fraction, "Fraction of samples to pollute");
    app->add_option("--methods", methods,
                    "Comma list: portrait-normal, portrait-gamma, portrait-iqr (append -vld), bspline, bspline-dfN");
    app->add_option("--df-sweep", df_sweep, "Comma list of B-spline degrees of freedom used by `bspline`");
    app->add_option("--repeats", repeats, "Timed repeats per method")->check(CLI::PositiveNumber);
    app->add_flag("--parallel", parallel, "Run methods concurrently (metrics only, timings contended)");
    app->add_option("--out-dir", out_dir, "Directory for bench.json, flag CSVs and plots");
    app->add_flag("--plot", plots, "Also write SVG plots");
  }

  std::vector<MethodConfig> method_list(std::size_t n) const {
    std::vector<std::size_t> dfs;
    for (const auto& t : split_list(df_sweep)) dfs.push_back(std::stoul(t));
    if (dfs.empty()) dfs = default_df_sweep(n);
    std::vector<std::string> names = split_list(methods);
    if (names.empty()) names = {"portrait-normal", "portrait-gamma", "portrait-iqr", "bspline"};
    std::vector<MethodConfig> out;
    for (const auto& name : names) {
      if (name == "bspline") {
        for (auto df : dfs) out.push_back(MethodConfig::spline(df));
      } else if (name.starts_with("bspline-df")) {
        out.push_back(MethodConfig::spline(std::stoul(name.substr(10))));
      } else if (name.starts_with("portrait-")) {
        std::string st = name.substr(9);
        const bool vld = st.ends_with("-vld");
        if (vld) st.resize(st.size() - 4);
        MethodConfig m = MethodConfig::portrait(parse_strategy(st), vld);
        if (in.period > 0) m.pipeline.period_samples = in.period;
        out.push_back(std::move(m));
      } else {
        throw InvalidInput("unknown method " + name);
      }
    }
    return out;
  }

  int run(std::ostream& out, std::ostream& err) const {
    if (in.input.empty() == (synthetic_periods == 0)) {
      throw InvalidInput("bench needs exactly one of an input file or --synthetic-periods");
    }
    const LoadSeries raw = synthetic_periods > 0 ? canonical_benchmark(synthetic_periods, synthetic_seed) : in.load();
    PollutionSpec spec;
    spec.fraction = fraction;
    spec.rng_seed = pollute_seed;
    const auto ms = method_list(raw.size());
    BenchmarkOptions opt;
    opt.repeats = repeats;
    opt.parallel = parallel;
    const BenchmarkResult r = benchmark(raw, spec, ms, opt);
    const std::filesystem::path dir(out_dir);
    write_file(dir / "bench.json", bench_to_json(r));
    const PollutedSeries polluted = pollute(raw, spec);
    for (const auto& row : r.rows) {
      std::string csv = "index,timestamp\n";
      for (auto i : row.flagged) csv += std::to_string(i) + "," + std::to_string(raw.timestamp(i)) + "\n";
      write_file(dir / ("flags-" + row.name + ".csv"), csv);
      if (plots) {
        write_file(dir / ("plot-" + row.name + ".svg"),
                   series_svg(polluted.series, row.flagged, row.name + ": " + std::to_string(row.flagged.size()) +
                                                                 " flags"));
      }
      if (!row.error.empty()) err << "warning: " << row.name << " failed: " << row.error << '\n';
    }
    if (plots) {
      try {
        const auto p = in.period_of(polluted.series);
        const auto v = build_vpds(polluted.series, p);
        if (v.scan) write_file(dir / "threshold-scan.svg", threshold_scan_svg(*v.scan, "VPD threshold scan"));
      } catch (const Error& e) {
        err << "warning: no threshold-scan plot: " << e.what() << '\n';
      }
    }
    out << bench_table(r);
    return kExitOk;
  }
};

struct ReviewCmd {
  IngestOptions in;
  PolicyOptions pol;
  std::string report;
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string journal;
  std::string out_dir = ".";
  std::string static_dir;
  bool allow_undecided = false;

  void add(CLI::App* app) {
    in.add(app);
    pol.add(app);
    app->add_option("--report", report, "Detection report from `detect` or `cleanse`")->required();
    app->add_option("--bind", bind, "Listen address");
    app->add_option("--port", port, "Listen port (0 picks a free one)")->check(CLI::Range(0, 65535));
    app->add_option("--journal", journal, "Decision journal (default: <out-dir>/review.journal)");
    app->add_option("--out-dir", out_dir, "Directory for the cleansed CSV and audit.jsonl");
    app->add_option("--static-dir", static_dir, "Directory with the review UI bundle");
    app->add_flag("--allow-undecided", allow_undecided, "Finalize with undecided flags (they follow the policy)");
  }

  int run(std::ostream&, std::ostream& err) const {
    ReviewOptions opt;
    opt.policy = pol.policy(!allow_undecided);
    opt.out_dir = out_dir;
    opt.journal = journal.empty() ? std::filesystem::path(out_dir) / "review.journal" : std::filesystem::path(journal);
    ReviewSession session(in.load(), report_from_json(read_file(report)), in.input, opt);
    ReviewServer server(session, static_dir);
    const int bound = server.start(bind, port);
    err << "session " << session.id() << ": " << session.report().flags.size() << " flags, "
        << session.decided_count() << " decided\n";
    err << "serving http://" << bind << ':' << bound << "/ (Ctrl-C to stop)\n";
    g_interrupted = false;
    auto prev_int = std::signal(SIGINT, on_signal);
    auto prev_term = std::signal(SIGTERM, on_signal);
    while (!g_interrupted && session.state() == SessionState::open) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    // Give the finalize response time to reach the client.
    if (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(200));
    server.stop();
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
    err << (session.state() == SessionState::finalized ? "finalized\n" : "stopped; decisions kept in the journal\n");
    return kExitOk;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Load-curve cleansing with portrait datasets", "loadclean"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", "loadclean 0.3.0");

  PeriodCmd period;
  PortraitCmd portrait;
  SegmentCmd segment;
  DetectCmd detect;
  CleanseCmd cleanse_cmd;
  BenchCmd bench;
  ReviewCmd review;
  const auto note = " Options may also come from a flat `key = value` file given with --config FILE.";
  auto* c_period = app.add_subcommand("period", "Detect the fundamental period");
  auto* c_portrait = app.add_subcommand("portrait", "Build basic and virtual portrait datasets");
  auto* c_segment = app.add_subcommand("segment", "Group periods into virtual landscapes");
  auto* c_detect = app.add_subcommand("detect", "Flag outliers and write a report");
  auto* c_cleanse = app.add_subcommand("cleanse", "Detect, replace and impute; write cleansed CSV and audit");
  auto* c_bench = app.add_subcommand("bench", "Compare portrait detection with a B-spline baseline");
  auto* c_review = app.add_subcommand("review", "Serve the human review API for a report");
  for (auto* c : {c_period, c_portrait, c_segment, c_detect, c_cleanse, c_bench, c_review}) {
    c->footer(note);
  }
  period.add(c_period);
  portrait.add(c_portrait);
  segment.add(c_segment);
  detect.add(c_detect);
  cleanse_cmd.add(c_cleanse);
  bench.add(c_bench);
  review.add(c_review);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (c_period->parsed()) return period.run(out, err);
    if (c_portrait->parsed()) return portrait.run(out, err);
    if (c_segment->parsed()) return segment.run(out, err);
    if (c_detect->parsed()) return detect.run(out, err);
    if (c_cleanse->parsed()) return cleanse_cmd.run(out, err);
    if (c_bench->parsed()) return bench.run(out, err);
    if (c_review->parsed()) return review.run(out, err);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace loadclean::tools
