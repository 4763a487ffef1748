#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "loadclean/cleanse.hpp"
#include "loadclean/detect.hpp"
#include "loadclean/series.hpp"

namespace httplib {
class Server;
}

namespace loadclean::tools {

// Request rejected by the session; `status` is the HTTP status to answer with.
class ReviewError : public std::runtime_error {
 public:
  ReviewError(int status, const std::string& message, std::vector<std::size_t> indices = {})
      : std::runtime_error(message), status_(status), indices_(std::move(indices)) {}
  int status() const noexcept { return status_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  int status_;
  std::vector<std::size_t> indices_;
};

enum class SessionState { open, finalized };

struct ReviewOptions {
  ReplacementPolicy policy{.require_confirmation = true};
  std::filesystem::path journal;  // append-only decision log; resumed when present
  std::filesystem::path out_dir = ".";
  std::string cleansed_name = "cleansed.csv";
  std::string audit_name = "audit.jsonl";
  std::string missing_token = "NA";
};

struct FinalizeResult {
  std::filesystem::path cleansed_csv;
  std::filesystem::path audit;
  std::size_t replaced = 0;
  std::size_t kept = 0;
  std::size_t imputed = 0;
};

// Human confirmation of one detection report. Mutations serialize through a
// single writer; readers take shared snapshots. Every decision is flushed to
// the journal before it is acknowledged.
class ReviewSession {
 public:
  // `series` must be the series the report was computed on (defaults filled).
  ReviewSession(LoadSeries series, DetectionReport report, std::string source, ReviewOptions options);
  ~ReviewSession();
  ReviewSession(const ReviewSession&) = delete;
  ReviewSession& operator=(const ReviewSession&) = delete;

  const std::string& id() const noexcept { return id_; }
  const std::string& source() const noexcept { return source_; }
  const DetectionReport& report() const noexcept { return report_; }
  const LoadSeries& series() const noexcept { return series_; }
  const ReviewOptions& options() const noexcept { return options_; }

  SessionState state() const;
  std::size_t decided_count() const;
  std::optional<Decision> decision(std::size_t index) const;
  std::vector<Decision> decisions() const;  // ascending index
  std::vector<std::size_t> undecided() const;

  // JSON documents served by the HTTP layer.
  std::string session_json() const;
  std::string flags_json(std::size_t offset, std::size_t limit) const;
  std::string flag_json(std::size_t index) const;
  std::string audit_json() const;

  // 404 for an unflagged index, 409 once finalized, 422 for a bad value.
  void decide(Decision d);
  // Body is the JSON posted by a client: {action, value?, note?}.
  std::string decide_json(std::size_t index, std::string_view body);
  // 409 when already finalized, or when confirmation is required and flags
  // remain undecided (the undecided indices are attached).
  FinalizeResult finalize();
  std::string finalize_json();

 private:
  void open_journal();
  void append_journal(const std::string& line);
  std::string flag_json_locked(const Flag& f) const;

  LoadSeries series_;
  DetectionReport report_;
  std::string source_;
  ReviewOptions options_;
  std::string id_;
  mutable std::shared_mutex mutex_;
  std::map<std::size_t, Decision> decisions_;
  SessionState state_ = SessionState::open;
  std::optional<FinalizeResult> finalized_;
  std::vector<AuditRow> audit_;
  std::FILE* journal_ = nullptr;
};

// HTTP front end for a session. All endpoints live under /api; static files
// (or a built-in placeholder page) are served at /.
class ReviewServer {
 public:
  ReviewServer(ReviewSession& session, std::filesystem::path static_dir = {});
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Binds `host:port` (port 0 picks a free one) and serves on a background
  // thread. Throws InvalidInput when the address cannot be bound.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();
  int port() const noexcept { return port_; }

 private:
  ReviewSession& session_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace loadclean::tools
