#include "loadclean/report_json.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "loadclean/error.hpp"

namespace loadclean {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double get_num(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::numeric_limits<double>::quiet_NaN();
  return it->get<double>();
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

json parse_doc(std::string_view text, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw InvalidInput(std::string(what) + ": malformed JSON: " + e.what());
  }
}

DecisionSource parse_source(const std::string& s) {
  if (s == "auto") return DecisionSource::automatic;
  if (s == "human") return DecisionSource::human;
  throw InvalidInput("unknown decided_by '" + s + "'");
}

json audit_json(const AuditRow& r) {
  json j = {{"index", r.index},
            {"timestamp", r.timestamp},
            {"kind", r.kind},
            {"action", r.action},
            {"old", num(r.old_value)},
            {"new", num(r.new_value)},
            {"decided_by", to_string(r.decided_by)}};
  j["vpd"] = r.group ? json(*r.group) : json(nullptr);
  j["strategy"] = r.strategy ? json(to_string(*r.strategy)) : json(nullptr);
  j["lower"] = r.bounds ? num(r.bounds->lower) : json(nullptr);
  j["upper"] = r.bounds ? num(r.bounds->upper) : json(nullptr);
  j["note"] = r.note;
  return j;
}

}  // namespace

std::string report_to_json(const DetectionReport& r, int indent) {
  json j;
  j["strategy"] = to_string(r.params.strategy);
  j["params"] = {{"alpha", r.params.alpha},
                 {"rho", r.params.rho},
                 {"sigma_scale", r.params.sigma_scale},
                 {"gamma_fallback_to_normal", r.params.gamma_fallback_to_normal}};
  j["series_length"] = r.series_length;
  j["period_samples"] = r.period_samples;

  json flags = json::array();
  for (const auto& f : r.flags) {
    flags.push_back({{"index", f.index},
                     {"value", num(f.value)},
                     {"vpd", f.group},
                     {"lower", num(f.bounds.lower)},
                     {"upper", num(f.bounds.upper)},
                     {"strategy", to_string(f.strategy)}});
  }
  j["flags"] = std::move(flags);

  json skipped = json::array();
  json groups = json::array();
  for (const auto& g : r.groups) {
    if (g.skipped) skipped.push_back({{"vpd", g.id}, {"reason", g.skip_reason}});
    json gj = {{"id", g.id},
               {"slots", g.slots},
               {"members", g.members},
               {"size", g.members.size()},
               {"theta", num(g.theta)},
               {"mad", num(g.mad)},
               {"mean", num(g.mean)},
               {"strategy", to_string(g.strategy)},
               {"low_power", g.low_power},
               {"skipped", g.skipped},
               {"skip_reason", g.skip_reason},
               {"warnings", g.warnings}};
    gj["vld"] = g.vld ? json(*g.vld) : json(nullptr);
    gj["lower"] = g.bounds ? num(g.bounds->lower) : json(nullptr);
    gj["upper"] = g.bounds ? num(g.bounds->upper) : json(nullptr);
    gj["gamma_shape"] = g.gamma_shape ? num(*g.gamma_shape) : json(nullptr);
    gj["gamma_scale"] = g.gamma_scale ? num(*g.gamma_scale) : json(nullptr);
    groups.push_back(std::move(gj));
  }
  j["skipped_groups"] = std::move(skipped);
  j["groups"] = std::move(groups);

  json vlds = json::array();
  for (const auto& v : r.vlds) {
    vlds.push_back({{"member_periods", v.member_periods}, {"theta", num(v.theta)}, {"mad", num(v.mad)}});
  }
  j["vlds"] = std::move(vlds);
  j["warnings"] = r.warnings;
  return j.dump(indent) + "\n";
}

DetectionReport report_from_json(std::string_view text) {
  const json j = parse_doc(text, "report");
  DetectionReport r;
  try {
    r.params.strategy = parse_strategy(j.at("strategy").get<std::string>());
    const json& p = j.at("params");
    r.params.alpha = p.at("alpha").get<double>();
    r.params.rho = p.at("rho").get<double>();
    r.params.sigma_scale = p.at("sigma_scale").get<double>();
    r.params.gamma_fallback_to_normal = p.value("gamma_fallback_to_normal", false);
    r.series_length = j.at("series_length").get<std::size_t>();
    r.period_samples = j.at("period_samples").get<std::size_t>();
    for (const auto& f : j.at("flags")) {
      Flag fl;
      fl.index = f.at("index").get<std::size_t>();
      fl.value = get_num(f, "value");
      fl.group = f.at("vpd").get<std::size_t>();
      fl.bounds = {get_num(f, "lower"), get_num(f, "upper")};
      fl.strategy = parse_strategy(f.value("strategy", std::string(to_string(r.params.strategy))));
      r.flags.push_back(fl);
    }
    for (const auto& gj : j.at("groups")) {
      GroupStats g;
      g.id = gj.at("id").get<std::size_t>();
      g.vld = get_opt<std::size_t>(gj, "vld");
      g.slots = gj.at("slots").get<std::vector<std::size_t>>();
      g.members = gj.at("members").get<std::vector<std::size_t>>();
      g.theta = get_num(gj, "theta");
      g.mad = get_num(gj, "mad");
      g.mean = get_num(gj, "mean");
      g.strategy = parse_strategy(gj.at("strategy").get<std::string>());
      const auto lo = get_opt<double>(gj, "lower");
      const auto hi = get_opt<double>(gj, "upper");
      if (lo && hi) g.bounds = Bounds{*lo, *hi};
      g.gamma_shape = get_opt<double>(gj, "gamma_shape");
      g.gamma_scale = get_opt<double>(gj, "gamma_scale");
      g.low_power = gj.value("low_power", false);
      g.skipped = gj.value("skipped", false);
      g.skip_reason = gj.value("skip_reason", std::string());
      g.warnings = gj.value("warnings", std::vector<std::string>{});
      r.groups.push_back(std::move(g));
    }
    for (const auto& v : j.value("vlds", json::array())) {
      r.vlds.push_back({v.at("member_periods").get<std::vector<std::size_t>>(), get_num(v, "theta"),
                        get_num(v, "mad")});
    }
    r.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("report: ") + e.what());
  }
  for (std::size_t k = 0; k < r.flags.size(); ++k) {
    if (r.flags[k].index >= r.series_length || (k > 0 && r.flags[k].index <= r.flags[k - 1].index)) {
      throw InvalidInput("report: flag indices must be unique, ascending and inside the series");
    }
  }
  return r;
}

std::string audit_row_to_json(const AuditRow& row) { return audit_json(row).dump(); }

std::string audit_to_jsonl(std::span<const AuditRow> rows) {
  std::string out;
  for (const auto& r : rows) {
    out += audit_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<AuditRow> audit_from_jsonl(std::string_view text) {
  std::vector<AuditRow> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const json j = parse_doc(line, "audit");
    try {
      AuditRow r;
      r.index = j.at("index").get<std::size_t>();
      r.timestamp = j.at("timestamp").get<std::int64_t>();
      r.kind = j.at("kind").get<std::string>();
      r.action = j.at("action").get<std::string>();
      r.old_value = get_num(j, "old");
      r.new_value = get_num(j, "new");
      r.decided_by = parse_source(j.at("decided_by").get<std::string>());
      r.group = get_opt<std::size_t>(j, "vpd");
      if (auto s = get_opt<std::string>(j, "strategy")) r.strategy = parse_strategy(*s);
      const auto lo = get_opt<double>(j, "lower");
      const auto hi = get_opt<double>(j, "upper");
      if (lo && hi) r.bounds = Bounds{*lo, *hi};
      r.note = j.value("note", std::string());
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("audit: ") + e.what());
    }
  }
  return rows;
}

std::string decision_to_json(const Decision& d) {
  json j = {{"index", d.index},
            {"action", to_string(d.action)},
            {"decided_by", to_string(d.decided_by)},
            {"note", d.note}};
  j["value"] = d.value ? num(*d.value) : json(nullptr);
  return j.dump();
}

Decision decision_from_json(std::string_view text) {
  const json j = parse_doc(text, "decision");
  try {
    Decision d;
    d.index = j.at("index").get<std::size_t>();
    const auto action = j.at("action").get<std::string>();
    if (action == "keep") d.action = Action::keep;
    else if (action == "replace") d.action = Action::replace;
    else throw InvalidInput("unknown action '" + action + "'");
    d.value = get_opt<double>(j, "value");
    d.decided_by = parse_source(j.value("decided_by", std::string("human")));
    d.note = j.value("note", std::string());
    return d;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("decision: ") + e.what());
  }
}

}  // namespace loadclean
