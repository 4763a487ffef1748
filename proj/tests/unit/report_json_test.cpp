#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "loadclean/error.hpp"
#include "loadclean/pollution.hpp"
#include "loadclean/report_json.hpp"
#include "loadclean/synthetic.hpp"

using namespace loadclean;

namespace {

PipelineResult polluted_run(Strategy st, bool vld) {
  const auto p = pollute(canonical_benchmark(62, 3), PollutionSpec{.rng_seed = 3});
  PipelineConfig cfg;
  cfg.detection.strategy = st;
  cfg.vld_mode = vld;
  return run_pipeline(p.series, cfg);
}

}  // namespace

TEST(ReportJson, RoundTrip) {
  for (Strategy st : {Strategy::normal, Strategy::gamma, Strategy::iqr}) {
    for (bool vld : {false, true}) {
      const auto res = polluted_run(st, vld);
      const std::string text = report_to_json(res.report);
      const auto back = report_from_json(text);
      EXPECT_EQ(report_to_json(back), text);
      EXPECT_EQ(back.flagged_indices(), res.report.flagged_indices());
      ASSERT_EQ(back.groups.size(), res.report.groups.size());
      for (std::size_t g = 0; g < back.groups.size(); ++g) {
        EXPECT_EQ(back.groups[g].members, res.report.groups[g].members);
        EXPECT_EQ(back.groups[g].theta, res.report.groups[g].theta);
        EXPECT_EQ(back.groups[g].bounds, res.report.groups[g].bounds);
        EXPECT_EQ(back.groups[g].vld, res.report.groups[g].vld);
      }
      EXPECT_EQ(back.params.strategy, st);
      EXPECT_EQ(back.series_length, res.report.series_length);
      EXPECT_EQ(back.period_samples, 24u);
      EXPECT_EQ(text.back(), '\n');
    }
  }
}

TEST(ReportJson, SkippedGroupsListed) {
  const auto s = LoadSeries::from_values({0, 0, 0, 0, 1, 1, 1, 1.2});
  GroupLayout layout;
  layout.period_samples = 4;
  layout.owner = {0, 0, 0, 0, 1, 1, 1, 1};
  for (std::size_t g = 0; g < 2; ++g) {
    DetectionGroup d;
    d.id = g;
    d.portrait.slots = {g};
    for (std::size_t i = 0; i < 4; ++i) d.portrait.sample_indices.push_back(4 * g + i);
    layout.groups.push_back(d);
  }
  OutlierParams p;
  p.strategy = Strategy::gamma;
  const auto text = report_to_json(detect(s, layout, p));
  EXPECT_NE(text.find("\"skipped_groups\""), std::string::npos);
  EXPECT_NE(text.find("positive median"), std::string::npos);
  const auto back = report_from_json(text);
  EXPECT_TRUE(back.groups[0].skipped);
  EXPECT_FALSE(back.groups[0].bounds);
}

TEST(ReportJson, RejectsMalformed) {
  EXPECT_THROW(report_from_json("{"), InvalidInput);
  EXPECT_THROW(audit_from_jsonl("{\"index\": 1}\nnot json\n"), InvalidInput);
}

TEST(AuditJson, RoundTrip) {
  const auto res = polluted_run(Strategy::normal, false);
  ASSERT_TRUE(res.cleansed);
  const auto& rows = res.cleansed->audit;
  ASSERT_FALSE(rows.empty());
  const std::string text = audit_to_jsonl(rows);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), rows.size());
  const auto back = audit_from_jsonl(text);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].index, rows[i].index);
    EXPECT_EQ(back[i].timestamp, rows[i].timestamp);
    EXPECT_EQ(back[i].kind, rows[i].kind);
    EXPECT_EQ(back[i].action, rows[i].action);
    EXPECT_EQ(back[i].old_value, rows[i].old_value);
    EXPECT_EQ(back[i].new_value, rows[i].new_value);
    EXPECT_EQ(back[i].group, rows[i].group);
    EXPECT_EQ(back[i].bounds, rows[i].bounds);
    EXPECT_EQ(back[i].strategy, rows[i].strategy);
    EXPECT_EQ(back[i].decided_by, rows[i].decided_by);
  }
  EXPECT_EQ(audit_to_jsonl(back), text);
}

TEST(DecisionJson, RoundTripAndDefaults) {
  const Decision d{42, Action::replace, 1.25, DecisionSource::human, "meter reset"};
  const auto back = decision_from_json(decision_to_json(d));
  EXPECT_EQ(back.index, 42u);
  EXPECT_EQ(back.action, Action::replace);
  EXPECT_EQ(back.value, 1.25);
  EXPECT_EQ(back.note, "meter reset");

  const auto minimal = decision_from_json(R"({"index": 3, "action": "keep"})");
  EXPECT_EQ(minimal.action, Action::keep);
  EXPECT_EQ(minimal.decided_by, DecisionSource::human);
  EXPECT_FALSE(minimal.value);
  EXPECT_THROW(decision_from_json(R"({"index": 3, "action": "maybe"})"), InvalidInput);
  EXPECT_THROW(decision_from_json(R"({"action": "keep"})"), InvalidInput);
}

TEST(AuditJson, NonFiniteBecomesNull) {
  AuditRow r;
  r.index = 1;
  r.kind = "aberrant";
  r.action = "keep";
  r.old_value = NAN;
  r.new_value = 2.0;
  const auto text = audit_row_to_json(r);
  EXPECT_NE(text.find("\"old\":null"), std::string::npos);
  EXPECT_TRUE(std::isnan(audit_from_jsonl(text + "\n").at(0).old_value));
}
