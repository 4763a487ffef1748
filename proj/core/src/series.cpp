#include "loadclean/series.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "loadclean/csv.hpp"
#include "loadclean/error.hpp"

namespace loadclean {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

void validate(std::int64_t interval, const std::vector<double>& values,
              const std::vector<SampleState>& states) {
  if (interval <= 0) throw InvalidInput("series: interval must be positive");
  if (values.empty()) throw InvalidInput("series: at least one sample is required");
  if (values.size() != states.size()) {
    throw InvalidInput("series: values and state mask differ in length");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (states[i] == SampleState::missing) continue;
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      throw InvalidInput("series: sample " + std::to_string(i) +
                         " is not a finite non-negative load");
    }
  }
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_iso(std::string_view s) {
  // YYYY-MM-DD
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned mo = 0, d = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) ||
      !parse_int(s.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  double seconds = static_cast<double>(days) * 86400.0;
  s.remove_prefix(10);
  if (s.empty()) return seconds;
  if (s.front() != 'T' && s.front() != ' ') return std::nullopt;
  s.remove_prefix(1);
  if (s.size() < 5 || s[2] != ':') return std::nullopt;
  unsigned hh = 0, mm = 0;
  if (!parse_int(s.substr(0, 2), hh) || !parse_int(s.substr(3, 2), mm) || hh > 23 || mm > 59) {
    return std::nullopt;
  }
  seconds += hh * 3600.0 + mm * 60.0;
  s.remove_prefix(5);
  if (!s.empty() && s.front() == ':') {
    if (s.size() < 3) return std::nullopt;
    unsigned ss = 0;
    if (!parse_int(s.substr(1, 2), ss) || ss > 60) return std::nullopt;
    seconds += ss;
    s.remove_prefix(3);
    if (!s.empty() && s.front() == '.') {
      std::size_t j = 1;
      while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
      if (j == 1) return std::nullopt;
      auto frac = parse_number(std::string("0") + std::string(s.substr(0, j)));
      if (!frac) return std::nullopt;
      seconds += *frac;
      s.remove_prefix(j);
    }
  }
  if (s.empty() || s == "Z") return seconds;
  if ((s.front() == '+' || s.front() == '-') && s.size() == 6 && s[3] == ':') {
    unsigned oh = 0, om = 0;
    if (!parse_int(s.substr(1, 2), oh) || !parse_int(s.substr(4, 2), om)) return std::nullopt;
    const double offset = oh * 3600.0 + om * 60.0;
    return s.front() == '+' ? seconds - offset : seconds + offset;
  }
  return std::nullopt;
}

std::size_t resolve_column(const ColumnRef& ref, const csv::Row* header, const char* what) {
  if (const auto* idx = std::get_if<std::size_t>(&ref)) return *idx;
  const auto& name = std::get<std::string>(ref);
  if (!header) {
    throw InvalidInput(std::string("ingest: ") + what + " column '" + name +
                       "' selected by name but the input has no header");
  }
  const auto it = std::find(header->begin(), header->end(), name);
  if (it == header->end()) {
    throw InvalidInput(std::string("ingest: ") + what + " column '" + name + "' not found");
  }
  return static_cast<std::size_t>(it - header->begin());
}

}  // namespace

LoadSeries::LoadSeries(std::int64_t start_epoch, std::int64_t interval, std::vector<double> values,
                       std::vector<SampleState> states, std::string meta, ColumnLabels labels)
    : start_epoch_(start_epoch),
      interval_(interval),
      values_(std::move(values)),
      states_(std::move(states)),
      meta_(std::move(meta)),
      labels_(std::move(labels)) {
  if (states_.empty()) states_.assign(values_.size(), SampleState::observed);
  validate(interval_, values_, states_);
}

LoadSeries LoadSeries::from_values(std::vector<double> values, std::int64_t interval,
                                   std::int64_t start_epoch) {
  return LoadSeries(start_epoch, interval, std::move(values));
}

std::size_t LoadSeries::missing_count() const noexcept {
  return static_cast<std::size_t>(
      std::count(states_.begin(), states_.end(), SampleState::missing));
}

LoadSeries LoadSeries::with_values(std::vector<double> values,
                                   std::vector<SampleState> states) const {
  return LoadSeries(start_epoch_, interval_, std::move(values), std::move(states), meta_, labels_);
}

LoadSeries LoadSeries::with_values(std::vector<double> values) const {
  return with_values(std::move(values), states_);
}

LoadSeries LoadSeries::slice(std::size_t offset, std::size_t length) const {
  if (length == 0 || offset + length > size()) {
    throw InvalidInput("series: slice out of range");
  }
  const auto first = static_cast<std::ptrdiff_t>(offset);
  const auto last = static_cast<std::ptrdiff_t>(offset + length);
  return LoadSeries(timestamp(offset), interval_,
                    std::vector<double>(values_.begin() + first, values_.begin() + last),
                    std::vector<SampleState>(states_.begin() + first, states_.begin() + last),
                    meta_, labels_);
}

bool operator==(const LoadSeries& a, const LoadSeries& b) {
  if (a.start_epoch_ != b.start_epoch_ || a.interval_ != b.interval_ ||
      a.states_ != b.states_ || a.values_.size() != b.values_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.values_.size(); ++i) {
    const double x = a.values_[i];
    const double y = b.values_[i];
    if (x != y && !(std::isnan(x) && std::isnan(y))) return false;
  }
  return true;
}

std::optional<double> parse_timestamp(std::string_view text, bool* was_iso) {
  text = trim(text);
  if (auto v = parse_number(text)) {
    if (was_iso) *was_iso = false;
    return v;
  }
  if (auto v = parse_iso(text)) {
    if (was_iso) *was_iso = true;
    return v;
  }
  return std::nullopt;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const std::int64_t day_count =
      epoch_seconds >= 0 ? epoch_seconds / 86400 : -((-epoch_seconds + 86399) / 86400);
  const std::int64_t rem = epoch_seconds - day_count * 86400;
  const year_month_day ymd{sys_days{days{day_count}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60),
                static_cast<int>(rem % 60));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, p);
}

LoadSeries parse_series(std::string_view text, const IngestConfig& cfg) {
  if (!std::isfinite(cfg.default_missing_value)) {
    throw InvalidInput("ingest: default_missing_value must be finite");
  }
  std::vector<std::size_t> lines;
  auto rows = csv::parse(text, cfg.delimiter, &lines);
  if (rows.empty()) throw InvalidInput("ingest: empty input");

  std::size_t first_data = 0;
  const csv::Row* header = nullptr;
  if (cfg.has_header) {
    header = &rows.front();
    first_data = 1;
  }
  if (rows.size() <= first_data) throw InvalidInput("ingest: no data rows");

  const std::size_t ts_col = resolve_column(cfg.timestamp_column, header, "timestamp");
  const std::size_t val_col = resolve_column(cfg.value_column, header, "value");

  ColumnLabels labels;
  if (header) {
    if (ts_col < header->size()) labels.timestamp = (*header)[ts_col];
    if (val_col < header->size()) labels.value = (*header)[val_col];
  }

  struct Parsed {
    double t;
    std::optional<double> value;
    std::size_t line;
  };
  std::vector<Parsed> parsed;
  parsed.reserve(rows.size() - first_data);
  bool any_iso = false;

  for (std::size_t r = first_data; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = lines[r];
    const std::string where = "ingest: line " + std::to_string(line) + ": ";
    if (ts_col >= row.size() || val_col >= row.size()) {
      throw InvalidInput(where + "missing column");
    }
    bool iso = false;
    const auto t = parse_timestamp(row[ts_col], &iso);
    if (!t) throw InvalidInput(where + "unparseable timestamp '" + row[ts_col] + "'");
    any_iso = any_iso || iso;

    const std::string_view raw = trim(row[val_col]);
    std::optional<double> value;
    const bool is_missing_token =
        std::any_of(cfg.missing_tokens.begin(), cfg.missing_tokens.end(),
                    [&](const std::string& tok) { return raw == tok; });
    if (!is_missing_token) {
      value = parse_number(raw);
      if (!value || !std::isfinite(*value)) {
        throw InvalidInput(where + "unparseable value '" + std::string(raw) + "'");
      }
      if (*value < 0.0) throw InvalidInput(where + "negative load " + std::string(raw));
    }
    parsed.push_back({*t, value, line});
  }
  labels.iso_timestamps = any_iso;

  std::int64_t interval = 0;
  if (cfg.interval) {
    interval = *cfg.interval;
  } else {
    if (parsed.size() < 2) {
      throw InvalidInput("ingest: a single row needs an explicit sampling interval");
    }
    const double dt = parsed[1].t - parsed[0].t;
    if (!(dt > 0.0)) {
      throw InvalidInput("ingest: line " + std::to_string(parsed[1].line) +
                         ": timestamps are not strictly increasing");
    }
    interval = std::llround(dt);
  }
  if (interval <= 0) throw InvalidInput("ingest: sampling interval must be positive");

  const std::int64_t start = std::llround(parsed.front().t);
  const double tolerance = 0.01 * static_cast<double>(interval);
  std::vector<std::int64_t> slots;
  slots.reserve(parsed.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const auto& p = parsed[i];
    if (i > 0 && !(p.t > parsed[i - 1].t)) {
      throw InvalidInput("ingest: line " + std::to_string(p.line) +
                         ": timestamps are not strictly increasing");
    }
    const double offset = p.t - static_cast<double>(start);
    const std::int64_t k = std::llround(offset / static_cast<double>(interval));
    if (std::abs(offset - static_cast<double>(k * interval)) > tolerance) {
      throw InvalidInput("ingest: line " + std::to_string(p.line) +
                         ": timestamp is off the sampling grid (interval " +
                         std::to_string(interval) + " s)");
    }
    if (!slots.empty() && k <= slots.back()) {
      throw InvalidInput("ingest: line " + std::to_string(p.line) +
                         ": two rows snap to the same grid slot");
    }
    slots.push_back(k);
  }

  const auto n = static_cast<std::size_t>(slots.back() + 1);
  std::vector<double> values(n, cfg.default_missing_value);
  std::vector<SampleState> states(n, SampleState::missing);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const auto k = static_cast<std::size_t>(slots[i]);
    if (parsed[i].value) {
      values[k] = *parsed[i].value;
      states[k] = SampleState::observed;
    }
  }
  return LoadSeries(start, interval, std::move(values), std::move(states), cfg.meta,
                    std::move(labels));
}

std::string serialize_series(const LoadSeries& s, std::span<const bool> flags,
                             std::string_view missing_token) {
  if (!flags.empty() && flags.size() != s.size()) {
    throw InvalidInput("serialize: flag column length differs from series length");
  }
  const auto& labels = s.labels();
  std::string out;
  out.reserve(s.size() * 24);
  csv::Row header{labels.timestamp, labels.value};
  if (!flags.empty()) header.emplace_back("flag");
  out += csv::join(header);
  out += '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::int64_t t = s.timestamp(i);
    out += labels.iso_timestamps ? format_iso8601(t) : std::to_string(t);
    out += ',';
    out += s.is_missing(i) ? csv::escape(missing_token) : format_double(s.value(i));
    if (!flags.empty()) out += flags[i] ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

LoadSeries fill_missing_defaults(const LoadSeries& s, double sentinel) {
  if (!std::isfinite(sentinel)) throw InvalidInput("fill_missing_defaults: sentinel must be finite");
  std::vector<double> values(s.values().begin(), s.values().end());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (s.is_missing(i)) values[i] = sentinel;
  }
  return s.with_values(std::move(values),
                       std::vector<SampleState>(s.states().begin(), s.states().end()));
}

}  // namespace loadclean
