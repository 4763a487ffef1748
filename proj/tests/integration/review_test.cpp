#include <gtest/gtest.h>

#include <thread>

#include "fixtures.hpp"
#include "httplib.h"
#include "json.hpp"
#include "loadclean/cleanse.hpp"
#include "loadclean/error.hpp"
#include "loadclean/report_json.hpp"
#include "loadclean/tools/review.hpp"

using namespace loadclean;
using namespace loadclean::tools;
using nlohmann::json;

namespace {

struct Detected {
  LoadSeries series;
  DetectionReport report;
};

// The report keeps only its first `n_flags` flags.
Detected detected_month(std::size_t n_flags, std::uint64_t seed = 42) {
  auto res = run_pipeline(fixtures::spiky_month(seed).series, PipelineConfig{});
  EXPECT_GE(res.report.flags.size(), n_flags);
  res.report.flags.resize(n_flags);
  return {res.input, res.report};
}

ReviewOptions options_in(const fixtures::TempDir& dir) {
  ReviewOptions o;
  o.out_dir = dir.path();
  o.journal = dir / "review.journal";
  return o;
}

struct Served {
  Served(const fixtures::TempDir& dir, Detected d, ReviewOptions o)
      : session(std::move(d.series), std::move(d.report), "in.csv", std::move(o)), server(session) {
    port = server.start("127.0.0.1", 0);
    (void)dir;
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(10);
    return c;
  }

  ReviewSession session;
  ReviewServer server;
  int port = 0;
};

json body_of(const httplib::Result& r) { return json::parse(r->body); }

httplib::Result post_decision(httplib::Client& c, std::size_t index, const json& body) {
  return c.Post("/api/flags/" + std::to_string(index) + "/decision", body.dump(), "application/json");
}

}  // namespace

TEST(Review, SessionEndpoint) {
  fixtures::TempDir dir;
  Served s(dir, detected_month(5), options_in(dir));
  auto c = s.client();
  const auto r = c.Get("/api/session");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Content-Type"), "application/json; charset=utf-8");
  const auto j = body_of(r);
  EXPECT_EQ(j["session_id"], s.session.id());
  EXPECT_EQ(j["n_flags"], 5);
  EXPECT_EQ(j["n_decided"], 0);
  EXPECT_EQ(j["state"], "open");
}

TEST(Review, FlagsListAndPaging) {
  fixtures::TempDir dir;
  const auto d = detected_month(5);
  const auto flags = d.report.flags;
  Served s(dir, d, options_in(dir));
  auto c = s.client();
  const auto all = body_of(c.Get("/api/flags"));
  ASSERT_EQ(all.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& f = all[k];
    EXPECT_EQ(f["index"], flags[k].index);
    EXPECT_EQ(f["lower"].get<double>(), flags[k].bounds.lower);
    EXPECT_EQ(f["upper"].get<double>(), flags[k].bounds.upper);
    EXPECT_EQ(f["vpd"], flags[k].group);
    const auto* g = s.session.report().owner(flags[k].index);
    ASSERT_NE(g, nullptr);
    EXPECT_EQ(f["theta"].get<double>(), g->theta);
    EXPECT_EQ(f["mad"].get<double>(), g->mad);
    EXPECT_EQ(f["suggested"].get<double>(), g->theta);
    EXPECT_EQ(f["timestamp"], s.session.series().timestamp(flags[k].index));
    EXPECT_TRUE(f["decision"].is_null());
    // Two periods either side, clipped at the ends of the series.
    const std::size_t i = flags[k].index, n = s.session.series().size();
    const std::size_t lo = i >= 48 ? i - 48 : 0, hi = std::min(n, i + 49);
    ASSERT_EQ(f["context"].size(), hi - lo);
    EXPECT_EQ(f["context"][i - lo]["index"], i);
    EXPECT_EQ(f["portrait_values"].size(), g->members.size());
  }
  const auto page = body_of(c.Get("/api/flags?offset=1&limit=2"));
  ASSERT_EQ(page.size(), 2u);
  EXPECT_EQ(page[0]["index"], flags[1].index);
  EXPECT_EQ(body_of(c.Get("/api/flags?offset=9")).size(), 0u);
  EXPECT_EQ(c.Get("/api/flags?limit=abc")->status, 400);
}

TEST(Review, DecisionReadYourWrite) {
  fixtures::TempDir dir;
  const auto d = detected_month(5);
  const std::size_t idx = d.report.flags[2].index;
  Served s(dir, d, options_in(dir));
  auto c = s.client();
  const auto r = post_decision(c, idx, {{"action", "replace"}, {"value", 1.0}});
  ASSERT_EQ(r->status, 200);
  const auto j = body_of(c.Get("/api/flags/" + std::to_string(idx)));
  EXPECT_EQ(j["decision"]["action"], "replace");
  EXPECT_EQ(j["decision"]["value"], 1.0);
  EXPECT_EQ(body_of(c.Get("/api/session"))["n_decided"], 1);

  // Last write wins.
  post_decision(c, idx, {{"action", "keep"}, {"note", "holiday"}});
  const auto k = body_of(c.Get("/api/flags/" + std::to_string(idx)));
  EXPECT_EQ(k["decision"]["action"], "keep");
  EXPECT_EQ(k["decision"]["note"], "holiday");
  EXPECT_EQ(body_of(c.Get("/api/session"))["n_decided"], 1);
}

TEST(Review, DecisionErrors) {
  fixtures::TempDir dir;
  const auto d = detected_month(5);
  const std::size_t idx = d.report.flags[0].index;
  std::size_t unflagged = 0;
  while (d.report.find(unflagged)) ++unflagged;
  Served s(dir, d, options_in(dir));
  auto c = s.client();
  EXPECT_EQ(post_decision(c, unflagged, {{"action", "keep"}})->status, 404);
  EXPECT_EQ(c.Get("/api/flags/" + std::to_string(unflagged))->status, 404);
  EXPECT_EQ(post_decision(c, idx, {{"action", "replace"}, {"value", -1.0}})->status, 422);
  EXPECT_EQ(post_decision(c, idx, {{"action", "maybe"}})->status, 422);
  EXPECT_EQ(post_decision(c, idx, {{"action", "replace"}, {"value", "one"}})->status, 422);
  EXPECT_EQ(c.Post("/api/flags/" + std::to_string(idx) + "/decision", "{not json", "application/json")->status, 400);
  EXPECT_EQ(c.Get("/api/nothing")->status, 404);
  EXPECT_EQ(s.session.decided_count(), 0u);
}

TEST(Review, FinalizeWithUndecidedIsConflict) {
  fixtures::TempDir dir;
  const auto d = detected_month(5);
  std::vector<std::size_t> rest;
  for (std::size_t k = 2; k < 5; ++k) rest.push_back(d.report.flags[k].index);
  Served s(dir, d, options_in(dir));
  auto c = s.client();
  post_decision(c, d.report.flags[0].index, {{"action", "keep"}});
  post_decision(c, d.report.flags[1].index, {{"action", "replace"}});
  const auto r = c.Post("/api/finalize", "", "application/json");
  ASSERT_EQ(r->status, 409);
  EXPECT_EQ(body_of(r)["undecided"], json(rest));
  EXPECT_EQ(body_of(c.Get("/api/session"))["state"], "open");
  EXPECT_EQ(c.Get("/api/export/audit")->status, 409);
  EXPECT_FALSE(std::filesystem::exists(dir / "cleansed.csv"));
}

TEST(Review, AllowUndecidedFollowsPolicy) {
  fixtures::TempDir dir;
  auto o = options_in(dir);
  o.policy.require_confirmation = false;
  const auto d = detected_month(5);
  Served s(dir, d, o);
  auto c = s.client();
  const auto r = c.Post("/api/finalize", "", "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  const auto expected = cleanse(d.series, d.report, {}, o.policy);
  EXPECT_EQ(read_file(dir / "cleansed.csv"), cleansed_csv(expected));
}

// Twenty flags decided through HTTP, then finalized; the output must match
// calling the library directly with the same decisions.
TEST(Review, ScriptedTwentyFlagLoop) {
  fixtures::TempDir dir;
  const auto d = detected_month(20);
  ASSERT_EQ(d.series.missing_count(), 0u);
  Served s(dir, d, options_in(dir));
  auto c = s.client();
  std::vector<Decision> script;
  for (std::size_t k = 0; k < 20; ++k) {
    const std::size_t idx = d.report.flags[k].index;
    json body;
    Decision dec{idx, Action::keep, std::nullopt, DecisionSource::human, ""};
    if (k % 3 == 0) {
      body = {{"action", "keep"}};
    } else if (k % 3 == 1) {
      body = {{"action", "replace"}, {"value", 0.5 + 0.125 * static_cast<double>(k)}};
      dec.action = Action::replace;
      dec.value = 0.5 + 0.125 * static_cast<double>(k);
    } else {
      body = {{"action", "replace"}};
      dec.action = Action::replace;
    }
    ASSERT_EQ(post_decision(c, idx, body)->status, 200);
    script.push_back(dec);
  }
  EXPECT_EQ(body_of(c.Get("/api/session"))["n_decided"], 20);
  const auto fin = c.Post("/api/finalize", "", "application/json");
  ASSERT_EQ(fin->status, 200) << fin->body;
  EXPECT_EQ(body_of(fin)["replaced"], 13);
  EXPECT_EQ(body_of(fin)["kept"], 7);

  ReplacementPolicy policy;
  policy.require_confirmation = true;
  const auto direct = apply_decisions(d.series, d.report, script, policy);
  EXPECT_EQ(read_file(dir / "cleansed.csv"), cleansed_csv(direct));
  EXPECT_EQ(read_file(dir / "audit.jsonl"), audit_to_jsonl(direct.audit));

  const auto audit = body_of(c.Get("/api/export/audit"));
  ASSERT_EQ(audit.size(), 20u);
  EXPECT_EQ(audit[0]["index"], d.report.flags[0].index);
  EXPECT_EQ(body_of(c.Get("/api/session"))["state"], "finalized");

  // Finalized sessions are immutable and finalize happens once.
  EXPECT_EQ(post_decision(c, d.report.flags[0].index, {{"action", "replace"}})->status, 409);
  EXPECT_EQ(c.Post("/api/finalize", "", "application/json")->status, 409);
}

TEST(Review, JournalResumesDecisions) {
  fixtures::TempDir dir;
  const auto d = detected_month(5);
  std::string id;
  {
    ReviewSession s(d.series, d.report, "in.csv", options_in(dir));
    id = s.id();
    s.decide({d.report.flags[0].index, Action::keep, std::nullopt, DecisionSource::human, ""});
    s.decide({d.report.flags[3].index, Action::replace, 2.0, DecisionSource::human, "meter fault"});
  }
  // A crash mid-write leaves a torn last line.
  {
    std::FILE* f = std::fopen((dir / "review.journal").c_str(), "ab");
    std::fputs("{\"decision\":{\"index\":", f);
    std::fclose(f);
  }
  ReviewSession resumed(d.series, d.report, "in.csv", options_in(dir));
  EXPECT_EQ(resumed.id(), id);
  EXPECT_EQ(resumed.decided_count(), 2u);
  const auto dec = resumed.decision(d.report.flags[3].index);
  ASSERT_TRUE(dec);
  EXPECT_EQ(dec->action, Action::replace);
  EXPECT_EQ(dec->value, 2.0);
  EXPECT_EQ(dec->note, "meter fault");

  const auto other = detected_month(4);
  EXPECT_THROW(ReviewSession(other.series, other.report, "in.csv", options_in(dir)), InvalidInput);
}

TEST(Review, FinalizedJournalStaysFinalized) {
  fixtures::TempDir dir;
  const auto d = detected_month(3);
  {
    ReviewSession s(d.series, d.report, "in.csv", options_in(dir));
    for (const auto& f : d.report.flags) s.decide({f.index, Action::replace, std::nullopt, DecisionSource::human, ""});
    s.finalize();
  }
  ReviewSession resumed(d.series, d.report, "in.csv", options_in(dir));
  EXPECT_EQ(resumed.state(), SessionState::finalized);
  EXPECT_THROW(resumed.decide({d.report.flags[0].index, Action::keep, std::nullopt, DecisionSource::human, ""}),
               ReviewError);
  EXPECT_EQ(json::parse(resumed.audit_json()).size(), 3u);
}

TEST(Review, ConcurrentDecisionsAllLand) {
  fixtures::TempDir dir;
  const auto d = detected_month(20);
  Served s(dir, d, options_in(dir));
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&, t] {
      auto c = s.client();
      for (std::size_t k = static_cast<std::size_t>(t); k < 20; k += 4) {
        post_decision(c, d.report.flags[k].index, {{"action", "keep"}});
        c.Get("/api/flags");
      }
    });
  }
  for (auto& w : workers) w.join();
  EXPECT_EQ(s.session.decided_count(), 20u);
  const auto journal = read_file(dir / "review.journal");
  EXPECT_EQ(std::count(journal.begin(), journal.end(), '\n'), 21);
}

TEST(Review, StaticRootServed) {
  fixtures::TempDir dir;
  Served s(dir, detected_month(2), options_in(dir));
  auto c = s.client();
  const auto r = c.Get("/");
  ASSERT_EQ(r->status, 200);
  EXPECT_NE(r->body.find("/api/session"), std::string::npos);
}

TEST(Review, PortInUse) {
  fixtures::TempDir dir;
  const auto d = detected_month(2);
  Served first(dir, d, options_in(dir));
  fixtures::TempDir other;
  ReviewSession second(d.series, d.report, "in.csv", options_in(other));
  ReviewServer server(second);
  EXPECT_THROW(server.start("127.0.0.1", first.port), InvalidInput);

  const auto in = fixtures::write_series(other, "in.csv", fixtures::spiky_month().series);
  ASSERT_EQ(fixtures::run({"detect", in.string(), "--report", (other / "report.json").string()}).status, 0);
  fixtures::TempDir out;
  const auto r = fixtures::run({"review", in.string(), "--report", (other / "report.json").string(), "--port",
                                std::to_string(first.port), "--out-dir", out.path().string()});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("cannot bind"), std::string::npos);
}

TEST(Review, RejectsMismatchedSource) {
  fixtures::TempDir dir;
  const auto d = detected_month(2);
  const auto shorter = d.series.slice(0, 24 * 10);
  EXPECT_THROW(ReviewSession(shorter, d.report, "in.csv", options_in(dir)), InvalidInput);
}
