#include "loadclean/tools/review.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "loadclean/error.hpp"
#include "loadclean/report_json.hpp"
#include "loadclean/tools/artifacts.hpp"

namespace loadclean::tools {

using nlohmann::json;

namespace {

std::string random_id() {
  std::random_device rd;
  std::ostringstream ss;
  for (int i = 0; i < 4; ++i) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", rd());
    ss << buf;
  }
  return ss.str();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const GroupStats* group_by_id(const DetectionReport& r, std::size_t id) {
  for (const auto& g : r.groups) {
    if (g.id == id) return &g;
  }
  return nullptr;
}

json decision_object(const Decision& d) {
  return json::parse(decision_to_json(d));
}

std::string_view state_name(SessionState s) { return s == SessionState::open ? "open" : "finalized"; }

}  // namespace

ReviewSession::ReviewSession(LoadSeries series, DetectionReport report, std::string source, ReviewOptions options)
    : series_(std::move(series)), report_(std::move(report)), source_(std::move(source)),
      options_(std::move(options)) {
  if (report_.series_length != series_.size()) {
    throw InvalidInput("review: report covers " + std::to_string(report_.series_length) +
                       " samples but the source has " + std::to_string(series_.size()));
  }
  options_.policy.validate(report_.params.strategy);
  open_journal();
}

ReviewSession::~ReviewSession() {
  if (journal_) std::fclose(journal_);
}

void ReviewSession::open_journal() {
  if (options_.journal.empty()) {
    id_ = random_id();
    return;
  }
  bool header = false;
  bool finalized = false;
  if (std::filesystem::exists(options_.journal)) {
    std::istringstream in(read_file(options_.journal));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        // A torn final line from a crash mid-write; everything before it was acknowledged.
        if (in.peek() == EOF) break;
        throw InvalidInput("review journal " + options_.journal.string() + " is corrupt");
      }
      if (j.contains("session")) {
        if (j.value("n_flags", std::size_t{0}) != report_.flags.size() ||
            j.value("series_length", std::size_t{0}) != series_.size()) {
          throw InvalidInput("review journal " + options_.journal.string() + " belongs to another report");
        }
        id_ = j.at("session").get<std::string>();
        header = true;
      } else if (j.contains("decision")) {
        const Decision d = decision_from_json(j.at("decision").dump());
        if (!report_.find(d.index)) throw InvalidInput("review journal names unflagged index " + std::to_string(d.index));
        decisions_[d.index] = d;
      } else if (j.value("finalized", false)) {
        finalized = true;
      }
    }
  }
  journal_ = std::fopen(options_.journal.c_str(), "ab");
  if (!journal_) throw InvalidInput("cannot open review journal " + options_.journal.string());
  if (!header) {
    id_ = random_id();
    append_journal(json{{"session", id_},
                        {"source", source_},
                        {"n_flags", report_.flags.size()},
                        {"series_length", series_.size()}}
                       .dump());
  }
  if (finalized) {
    // Outputs were written before the journal recorded the finalize; rebuild the audit.
    std::vector<Decision> ds;
    for (const auto& [i, d] : decisions_) ds.push_back(d);
    audit_ = cleanse(series_, report_, ds, options_.policy).audit;
    FinalizeResult r;
    r.cleansed_csv = options_.out_dir / options_.cleansed_name;
    r.audit = options_.out_dir / options_.audit_name;
    for (const auto& row : audit_) {
      r.replaced += row.action == "replace";
      r.kept += row.action == "keep";
      r.imputed += row.action == "impute";
    }
    finalized_ = r;
    state_ = SessionState::finalized;
  }
}

void ReviewSession::append_journal(const std::string& line) {
  if (!journal_) return;
  const std::string text = line + "\n";
  if (std::fwrite(text.data(), 1, text.size(), journal_) != text.size() || std::fflush(journal_) != 0 ||
      ::fsync(::fileno(journal_)) != 0) {
    throw ReviewError(500, "cannot write review journal");
  }
}

SessionState ReviewSession::state() const {
  std::shared_lock lock(mutex_);
  return state_;
}

std::size_t ReviewSession::decided_count() const {
  std::shared_lock lock(mutex_);
  return decisions_.size();
}

std::optional<Decision> ReviewSession::decision(std::size_t index) const {
  std::shared_lock lock(mutex_);
  const auto it = decisions_.find(index);
  if (it == decisions_.end()) return std::nullopt;
  return it->second;
}

std::vector<Decision> ReviewSession::decisions() const {
  std::shared_lock lock(mutex_);
  std::vector<Decision> out;
  for (const auto& [i, d] : decisions_) out.push_back(d);
  return out;
}

std::vector<std::size_t> ReviewSession::undecided() const {
  std::shared_lock lock(mutex_);
  std::vector<std::size_t> out;
  for (const auto& f : report_.flags) {
    if (!decisions_.count(f.index)) out.push_back(f.index);
  }
  return out;
}

std::string ReviewSession::session_json() const {
  std::shared_lock lock(mutex_);
  json j{{"session_id", id_},
         {"source", source_},
         {"n_flags", report_.flags.size()},
         {"n_decided", decisions_.size()},
         {"state", state_name(state_)},
         {"strategy", to_string(report_.params.strategy)},
         {"period_samples", report_.period_samples},
         {"require_confirmation", options_.policy.require_confirmation}};
  return j.dump();
}

std::string ReviewSession::flag_json_locked(const Flag& f) const {
  const GroupStats* g = group_by_id(report_, f.group);
  json j{{"index", f.index},
         {"timestamp", series_.timestamp(f.index)},
         {"time", format_iso8601(series_.timestamp(f.index))},
         {"value", number_or_null(f.value)},
         {"missing", series_.is_missing(f.index)},
         {"vpd", f.group},
         {"lower", number_or_null(f.bounds.lower)},
         {"upper", number_or_null(f.bounds.upper)},
         {"strategy", to_string(f.strategy)}};
  if (g) {
    j["theta"] = number_or_null(g->theta);
    j["mad"] = number_or_null(g->mad);
    j["vld"] = g->vld ? json(*g->vld) : json(nullptr);
    double suggested = g->theta;
    if (options_.policy.aberrant_policy != Policy::leave) {
      try {
        suggested = policy_value(*g, options_.policy.aberrant_policy);
      } catch (const Error&) {
      }
    }
    j["suggested"] = number_or_null(suggested);
    json members = json::array();
    for (auto i : g->members) members.push_back(number_or_null(series_.value(i)));
    j["portrait_values"] = std::move(members);
  } else {
    j["theta"] = nullptr;
    j["mad"] = nullptr;
    j["vld"] = nullptr;
    j["suggested"] = nullptr;
    j["portrait_values"] = json::array();
  }
  // Two periods either side of the flag.
  const std::size_t r = std::max<std::size_t>(report_.period_samples, 1);
  const std::size_t lo = f.index >= 2 * r ? f.index - 2 * r : 0;
  const std::size_t hi = std::min(series_.size(), f.index + 2 * r + 1);
  json context = json::array();
  for (std::size_t i = lo; i < hi; ++i) {
    context.push_back(json{{"index", i},
                           {"timestamp", series_.timestamp(i)},
                           {"value", number_or_null(series_.value(i))},
                           {"missing", series_.is_missing(i)},
                           {"flagged", report_.find(i) != nullptr}});
  }
  j["context"] = std::move(context);
  const auto it = decisions_.find(f.index);
  j["decision"] = it == decisions_.end() ? json(nullptr) : decision_object(it->second);
  return j.dump();
}

std::string ReviewSession::flags_json(std::size_t offset, std::size_t limit) const {
  std::shared_lock lock(mutex_);
  std::string out = "[";
  const std::size_t end = std::min(report_.flags.size(), offset + std::min(limit, report_.flags.size()));
  for (std::size_t k = offset; k < end; ++k) {
    if (k > offset) out += ',';
    out += flag_json_locked(report_.flags[k]);
  }
  out += ']';
  return out;
}

std::string ReviewSession::flag_json(std::size_t index) const {
  std::shared_lock lock(mutex_);
  const Flag* f = report_.find(index);
  if (!f) throw ReviewError(404, "index " + std::to_string(index) + " is not flagged");
  return flag_json_locked(*f);
}

std::string ReviewSession::audit_json() const {
  std::shared_lock lock(mutex_);
  if (state_ != SessionState::finalized) throw ReviewError(409, "session is not finalized");
  std::string out = "[";
  for (std::size_t i = 0; i < audit_.size(); ++i) {
    if (i) out += ',';
    out += audit_row_to_json(audit_[i]);
  }
  out += ']';
  return out;
}

void ReviewSession::decide(Decision d) {
  std::unique_lock lock(mutex_);
  if (!report_.find(d.index)) throw ReviewError(404, "index " + std::to_string(d.index) + " is not flagged");
  if (state_ == SessionState::finalized) throw ReviewError(409, "session is finalized");
  if (d.value && (!std::isfinite(*d.value) || *d.value < 0.0)) {
    throw ReviewError(422, "replacement value must be finite and non-negative");
  }
  if (d.action == Action::keep) d.value.reset();
  d.decided_by = DecisionSource::human;
  append_journal(json{{"decision", decision_object(d)}}.dump());
  decisions_[d.index] = std::move(d);
}

std::string ReviewSession::decide_json(std::size_t index, std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    throw ReviewError(400, "request body is not JSON");
  }
  if (!j.is_object()) throw ReviewError(422, "decision must be a JSON object");
  Decision d;
  d.index = index;
  const std::string action = j.contains("action") && j["action"].is_string() ? j["action"].get<std::string>() : "";
  if (action == "keep") {
    d.action = Action::keep;
  } else if (action == "replace") {
    d.action = Action::replace;
  } else {
    throw ReviewError(422, "action must be keep or replace");
  }
  if (j.contains("value") && !j["value"].is_null()) {
    if (!j["value"].is_number()) throw ReviewError(422, "value must be a number");
    d.value = j["value"].get<double>();
  }
  if (j.contains("note") && j["note"].is_string()) d.note = j["note"].get<std::string>();
  decide(std::move(d));
  return flag_json(index);
}

FinalizeResult ReviewSession::finalize() {
  std::unique_lock lock(mutex_);
  if (state_ == SessionState::finalized) throw ReviewError(409, "session is already finalized");
  std::vector<std::size_t> pending;
  for (const auto& f : report_.flags) {
    if (!decisions_.count(f.index)) pending.push_back(f.index);
  }
  if (options_.policy.require_confirmation && !pending.empty()) {
    throw ReviewError(409, std::to_string(pending.size()) + " flags are undecided", std::move(pending));
  }
  std::vector<Decision> ds;
  for (const auto& [i, d] : decisions_) ds.push_back(d);
  CleanseResult res = cleanse(series_, report_, ds, options_.policy);
  FinalizeResult r;
  r.cleansed_csv = options_.out_dir / options_.cleansed_name;
  r.audit = options_.out_dir / options_.audit_name;
  write_file(r.cleansed_csv, cleansed_csv(res, options_.missing_token));
  write_file(r.audit, audit_to_jsonl(res.audit));
  for (const auto& row : res.audit) {
    r.replaced += row.action == "replace";
    r.kept += row.action == "keep";
    r.imputed += row.action == "impute";
  }
  append_journal(json{{"finalized", true}}.dump());
  audit_ = std::move(res.audit);
  finalized_ = r;
  state_ = SessionState::finalized;
  return r;
}

std::string ReviewSession::finalize_json() {
  const FinalizeResult r = finalize();
  return json{{"state", "finalized"},
              {"cleansed_csv", r.cleansed_csv.string()},
              {"audit", r.audit.string()},
              {"replaced", r.replaced},
              {"kept", r.kept},
              {"imputed", r.imputed}}
      .dump();
}

namespace {

constexpr const char* kJson = "application/json; charset=utf-8";

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>loadclean review</title></head>
<body>
<h1>loadclean review</h1>
<p>The review API is available under <code>/api</code>:
<code>/api/session</code>, <code>/api/flags</code>, <code>/api/flags/{index}</code>,
<code>/api/flags/{index}/decision</code>, <code>/api/finalize</code>, <code>/api/export/audit</code>.</p>
<p id="session"></p>
<script>
fetch('/api/session').then(r => r.json()).then(s => {
  document.getElementById('session').textContent =
    `session ${s.session_id}: ${s.n_decided} of ${s.n_flags} flags decided (${s.state})`;
});
</script>
</body></html>
)";

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::vector<std::size_t>& indices = {}) {
  json j{{"error", message}};
  if (!indices.empty()) j["undecided"] = indices;
  res.status = status;
  res.set_content(j.dump(), kJson);
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ReviewError& e) {
      send_error(res, e.status(), e.what(), e.indices());
    } catch (const InvalidInput& e) {
      send_error(res, 422, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ReviewError(400, std::string(key) + " must be a non-negative integer");
  return out;
}

std::size_t path_index(const httplib::Request& req) {
  std::size_t out = 0;
  const std::string v = req.matches[1];
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ReviewError(404, "no such flag");
  return out;
}

}  // namespace

ReviewServer::ReviewServer(ReviewSession& session, std::filesystem::path static_dir)
    : session_(session), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  // Without SO_REUSEPORT a second server on a busy port fails to bind.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  s.Get("/api/session", guarded([this](const httplib::Request&, httplib::Response& res) {
          res.set_content(session_.session_json(), kJson);
        }));
  s.Get("/api/flags", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const std::size_t offset = query_size(req, "offset", 0);
          const std::size_t limit = query_size(req, "limit", 100);
          res.set_content(session_.flags_json(offset, limit), kJson);
        }));
  s.Get(R"(/api/flags/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
          res.set_content(session_.flag_json(path_index(req)), kJson);
        }));
  s.Post(R"(/api/flags/(\d+)/decision)", guarded([this](const httplib::Request& req, httplib::Response& res) {
           res.set_content(session_.decide_json(path_index(req), req.body), kJson);
         }));
  s.Post("/api/finalize", guarded([this](const httplib::Request&, httplib::Response& res) {
           res.set_content(session_.finalize_json(), kJson);
         }));
  s.Get("/api/export/audit", guarded([this](const httplib::Request&, httplib::Response& res) {
          res.set_content(session_.audit_json(), kJson);
        }));
  if (!static_dir.empty() && std::filesystem::is_directory(static_dir)) {
    s.set_mount_point("/", static_dir.string());
  } else {
    s.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty() && req.path.starts_with("/api")) {
      res.set_content(json{{"error", "no such endpoint"}}.dump(), kJson);
    }
  });
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::start(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    if (port_ <= 0) throw InvalidInput("cannot bind " + host);
  } else {
    if (!server_->bind_to_port(host, port)) {
      throw InvalidInput("cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
    }
    port_ = port;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void ReviewServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void ReviewServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace loadclean::tools
