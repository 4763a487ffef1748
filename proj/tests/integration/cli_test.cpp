#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "fixtures.hpp"
#include "json.hpp"
#include "loadclean/cleanse.hpp"
#include "loadclean/report_json.hpp"

using namespace loadclean;
using fixtures::run;
using nlohmann::json;

namespace {

LoadSeries white_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return LoadSeries::from_values(std::move(v));
}

std::string text_of(const std::filesystem::path& p) { return tools::read_file(p); }

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).status, 0);
  EXPECT_EQ(run({}).status, 1);
  EXPECT_EQ(run({"frobnicate"}).status, 1);
  const auto bogus = run({"detect", "--strategy", "bogus", "in.csv"});
  EXPECT_EQ(bogus.status, 1);
  EXPECT_NE(bogus.err.find("--strategy"), std::string::npos);
  EXPECT_EQ(run({"detect", "--no-such-flag", "in.csv"}).status, 1);
}

TEST(Cli, MissingInputIsUserError) {
  const auto r = run({"period", "/nonexistent/file.csv"});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("cannot read"), std::string::npos);
}

TEST(Cli, PeriodJson) {
  fixtures::TempDir dir;
  const auto in = fixtures::write_series(dir, "month.csv", canonical_benchmark(31));
  const auto r = run({"period", in.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["period_samples"], 24);
  EXPECT_EQ(j["period_seconds"], 86400);
  EXPECT_NEAR(j["fundamental_frequency_hz"].get<double>(), 1.0 / 86400.0, 1e-12);
  EXPECT_GT(j["confidence"].get<double>(), 5.0);
}

TEST(Cli, PeriodSensitivity) {
  fixtures::TempDir dir;
  const auto in = fixtures::write_series(dir, "year.csv", canonical_benchmark(90));
  const auto r = run({"period", in.string(), "--sensitivity-trials", "20", "--seed", "3"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["sensitivity"]["trials"], 20);
  EXPECT_NEAR(j["sensitivity"]["mean_period_seconds"].get<double>(), 86400.0, 1.0);
}

TEST(Cli, PeriodOnWhiteNoiseExitsTwo) {
  fixtures::TempDir dir;
  const auto in = fixtures::write_series(dir, "noise.csv", white_noise(744, 5));
  const auto r = run({"period", in.string()});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("no significant periodicity"), std::string::npos);
}

TEST(Cli, DetectWritesReport) {
  fixtures::TempDir dir;
  const auto polluted = fixtures::spiky_month();
  const auto in = fixtures::write_series(dir, "in.csv", polluted.series);
  const auto report = dir / "report.json";
  const auto flagged = dir / "flagged.csv";
  const auto plot = dir / "flags.svg";
  const auto r = run({"detect", "--strategy", "gamma", "--alpha", "0.05", in.string(), "--report", report.string(),
                      "--flagged-csv", flagged.string(), "--plot", plot.string()});
  ASSERT_EQ(r.status, 0) << r.err;

  PipelineConfig cfg;
  cfg.detection.strategy = Strategy::gamma;
  const auto direct = run_pipeline(text_of(in), cfg);
  const auto back = report_from_json(text_of(report));
  EXPECT_EQ(back.flagged_indices(), direct.report.flagged_indices());
  EXPECT_EQ(text_of(report), report_to_json(direct.report));
  EXPECT_EQ(back.params.strategy, Strategy::gamma);

  const auto rows = text_of(flagged);
  EXPECT_EQ(rows.substr(0, rows.find('\n')), "timestamp,value,flag");
  EXPECT_EQ(text_of(plot).rfind("<svg", 0), 0u);
}

TEST(Cli, DetectReportToStdout) {
  fixtures::TempDir dir;
  const auto in = fixtures::write_series(dir, "in.csv", fixtures::spiky_month().series);
  const auto r = run({"detect", in.string(), "--report", "-", "--strategy", "iqr"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["strategy"], "iqr");
  ASSERT_FALSE(j["flags"].empty());
  for (const auto& f : j["flags"]) {
    for (const char* key : {"index", "value", "vpd", "lower", "upper"}) EXPECT_TRUE(f.contains(key)) << key;
  }
}

TEST(Cli, CleanseMatchesPipeline) {
  fixtures::TempDir dir;
  const auto polluted = pollute(canonical_benchmark(31), PollutionSpec{});
  const auto in = fixtures::write_series(dir, "in.csv", polluted.series);
  const auto out = dir / "out";
  const auto r = run({"cleanse", in.string(), "--out-dir", out.string()});
  ASSERT_EQ(r.status, 0) << r.err;

  const auto direct = run_pipeline(text_of(in), PipelineConfig{});
  ASSERT_TRUE(direct.cleansed);
  EXPECT_EQ(text_of(out / "cleansed.csv"), tools::cleansed_csv(*direct.cleansed));
  EXPECT_EQ(text_of(out / "audit.jsonl"), audit_to_jsonl(direct.cleansed->audit));
  EXPECT_EQ(text_of(out / "report.json"), report_to_json(direct.report));
}

TEST(Cli, ConfigFileWithOverride) {
  fixtures::TempDir dir;
  const auto in = fixtures::write_series(dir, "in.csv", fixtures::spiky_month().series);
  const auto cfg = dir / "loadclean.conf";
  tools::write_file(cfg, "# detection settings\nstrategy = iqr\nrho = 3.0\n\nreport = \"" +
                             (dir / "a.json").string() + "\"\n");
  ASSERT_EQ(run({"detect", "--config", cfg.string(), in.string()}).status, 0);
  auto a = report_from_json(text_of(dir / "a.json"));
  EXPECT_EQ(a.params.strategy, Strategy::iqr);
  EXPECT_EQ(a.params.rho, 3.0);

  const auto b_path = dir / "b.json";
  const auto r = run({"detect", "--config", cfg.string(), in.string(), "--strategy", "normal", "--report",
                      b_path.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(report_from_json(text_of(b_path)).params.strategy, Strategy::normal);

  tools::write_file(dir / "bad.conf", "strategy = iqr\nno-such-option = 1\n");
  EXPECT_EQ(run({"detect", "--config", (dir / "bad.conf").string(), in.string()}).status, 1);
  tools::write_file(dir / "broken.conf", "strategy iqr\n");
  EXPECT_EQ(run({"detect", "--config", (dir / "broken.conf").string(), in.string()}).status, 1);
}

TEST(Cli, CleanseRequiringConfirmationWritesOnlyReport) {
  fixtures::TempDir dir;
  const auto in = fixtures::write_series(dir, "in.csv", fixtures::spiky_month().series);
  const auto r = run({"cleanse", in.string(), "--require-confirmation", "--out-dir", dir.path().string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_FALSE(std::filesystem::exists(dir / "cleansed.csv"));
  EXPECT_NE(r.err.find("loadclean review"), std::string::npos);
}

TEST(Cli, CleanseWithDecisionFile) {
  fixtures::TempDir dir;
  const auto in = fixtures::write_series(dir, "in.csv", fixtures::spiky_month().series);
  const auto detected = run_pipeline(text_of(in), PipelineConfig{});
  ASSERT_GE(detected.report.flags.size(), 2u);
  const auto& flags = detected.report.flags;
  const std::vector<Decision> ds = {{flags[0].index, Action::keep, std::nullopt, DecisionSource::human, "ok"},
                                    {flags[1].index, Action::replace, 1.25, DecisionSource::human, ""}};
  tools::write_file(dir / "decisions.jsonl", decision_to_json(ds[0]) + "\n" + decision_to_json(ds[1]) + "\n");
  const auto r = run({"cleanse", in.string(), "--decisions", (dir / "decisions.jsonl").string(), "--out-dir",
                      dir.path().string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto direct = cleanse(detected.input, detected.report, ds, ReplacementPolicy{});
  EXPECT_EQ(text_of(dir / "cleansed.csv"), tools::cleansed_csv(direct));
  EXPECT_EQ(text_of(dir / "audit.jsonl"), audit_to_jsonl(direct.audit));
}

TEST(Cli, PortraitFindsNightAndDay) {
  fixtures::TempDir dir;
  const auto in = fixtures::write_series(dir, "in.csv", canonical_benchmark(31));
  const auto plot = dir / "scan.svg";
  const auto r = run({"portrait", in.string(), "--plot", plot.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["vpds"].size(), 2u);
  EXPECT_EQ(j["vpds"][0]["slot_indices"], json({0, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(j["vpds"][0]["size"], 8 * 31);
  EXPECT_EQ(j["bpds"].size(), 24u);
  EXPECT_EQ(j["scan"]["selected_count"], 2);
  EXPECT_EQ(j["scan"]["thresholds"].size(), j["scan"]["mean_distances"].size());
  EXPECT_EQ(text_of(plot).rfind("<svg", 0), 0u);

  const auto fixed = run({"portrait", in.string(), "--threshold", "1e-9"});
  ASSERT_EQ(fixed.status, 0) << fixed.err;
  EXPECT_EQ(json::parse(fixed.out)["vpds"].size(), 1u);
  EXPECT_TRUE(json::parse(fixed.out)["scan"].is_null());
}

TEST(Cli, SegmentFindsTwoRegimes) {
  fixtures::TempDir dir;
  const auto in = fixtures::write_series(dir, "in.csv", two_regime_benchmark(60));
  const auto r = run({"segment", in.string(), "--period", "24"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["vlds"].size(), 2u);
  EXPECT_EQ(j["vlds"][0]["member_periods"].size(), 30u);
  EXPECT_EQ(j["vlds"][1]["member_periods"][0], 30);
  EXPECT_TRUE(j["tail"].is_null());
}

TEST(Cli, BenchOnSyntheticSeries) {
  fixtures::TempDir dir;
  const auto r = run({"bench", "--synthetic-periods", "31", "--repeats", "1", "--methods",
                      "portrait-normal,portrait-iqr,bspline-df25", "--out-dir", dir.path().string(), "--plot"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.rfind("method", 0), 0u);
  for (const char* name : {"portrait-normal", "portrait-iqr", "bspline-df25"}) {
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
    EXPECT_TRUE(std::filesystem::exists(dir / ("flags-" + std::string(name) + ".csv"))) << name;
    EXPECT_TRUE(std::filesystem::exists(dir / ("plot-" + std::string(name) + ".svg"))) << name;
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "threshold-scan.svg"));
  const auto j = json::parse(text_of(dir / "bench.json"));
  EXPECT_EQ(j["series_length"], 744);
}

TEST(Cli, BenchDfSweepAndValidation) {
  fixtures::TempDir dir;
  const auto r = run({"bench", "--synthetic-periods", "31", "--repeats", "1", "--methods", "bspline", "--df-sweep",
                      "20,40", "--out-dir", dir.path().string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("bspline-df20"), std::string::npos);
  EXPECT_NE(r.out.find("bspline-df40"), std::string::npos);
  EXPECT_EQ(run({"bench", "--out-dir", dir.path().string()}).status, 1);
  EXPECT_EQ(run({"bench", "--synthetic-periods", "31", "--methods", "kernel", "--out-dir", dir.path().string()}).status,
            1);
}

#ifdef LOADCLEAN_CLI_PATH
TEST(CliBinary, ExitStatuses) {
  fixtures::TempDir dir;
  const auto noise = fixtures::write_series(dir, "noise.csv", white_noise(744, 8));
  const auto month = fixtures::write_series(dir, "month.csv", fixtures::spiky_month().series);
  const std::string exe = LOADCLEAN_CLI_PATH;
  const auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status(exe + " detect --strategy bogus " + month.string()), 1);
  EXPECT_EQ(status(exe + " period " + noise.string()), 2);
  EXPECT_EQ(status("cd " + dir.path().string() + " && " + exe + " detect --strategy gamma --alpha 0.05 month.csv"),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
}
#endif
