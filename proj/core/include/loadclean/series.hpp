#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace loadclean {

enum class SampleState : std::uint8_t {
  observed,
  missing,  // value slot holds a default/sentinel, not a measurement
  imputed,  // was missing, replaced from portrait statistics
};

// How the series was laid out in its source file, so writers can mirror it.
struct ColumnLabels {
  std::string timestamp = "timestamp";
  std::string value = "value";
  bool iso_timestamps = false;
};

// Uniformly sampled load curve (kWh per sample). Immutable once built; every
// transformation returns a new series. Observed values are finite and >= 0.
class LoadSeries {
 public:
  LoadSeries(std::int64_t start_epoch, std::int64_t interval, std::vector<double> values,
             std::vector<SampleState> states = {}, std::string meta = {},
             ColumnLabels labels = {});

  static LoadSeries from_values(std::vector<double> values, std::int64_t interval = 3600,
                                std::int64_t start_epoch = 0);

  std::int64_t start_epoch() const noexcept { return start_epoch_; }
  std::int64_t interval() const noexcept { return interval_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::int64_t timestamp(std::size_t i) const noexcept {
    return start_epoch_ + static_cast<std::int64_t>(i) * interval_;
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const SampleState> states() const noexcept { return states_; }
  double value(std::size_t i) const { return values_.at(i); }
  SampleState state(std::size_t i) const { return states_.at(i); }
  bool is_missing(std::size_t i) const { return states_.at(i) == SampleState::missing; }
  std::size_t missing_count() const noexcept;

  const std::string& meta() const noexcept { return meta_; }
  const ColumnLabels& labels() const noexcept { return labels_; }

  // Same timeline and metadata, new contents. Validates like the constructor.
  LoadSeries with_values(std::vector<double> values, std::vector<SampleState> states) const;
  LoadSeries with_values(std::vector<double> values) const;

  // Contiguous window [offset, offset + length).
  LoadSeries slice(std::size_t offset, std::size_t length) const;

  friend bool operator==(const LoadSeries&, const LoadSeries&);

 private:
  std::int64_t start_epoch_;
  std::int64_t interval_;
  std::vector<double> values_;
  std::vector<SampleState> states_;
  std::string meta_;
  ColumnLabels labels_;
};

using ColumnRef = std::variant<std::size_t, std::string>;

struct IngestConfig {
  ColumnRef timestamp_column = std::size_t{0};
  ColumnRef value_column = std::size_t{1};
  bool has_header = true;
  std::vector<std::string> missing_tokens = {"", "NA", "NaN", "nan", "null"};
  // Stored in the value slot of missing samples; must be finite.
  double default_missing_value = 0.0;
  char delimiter = ',';
  // Sampling interval in seconds. Required when the input has one row,
  // otherwise inferred from the first two rows.
  std::optional<std::int64_t> interval;
  std::string meta;
};

// Parses a CSV document into a LoadSeries. Rows are snapped to the sampling
// grid when within 1% of the interval; timestamp gaps become missing samples.
// Throws InvalidInput naming the offending line.
LoadSeries parse_series(std::string_view text, const IngestConfig& cfg = {});

// Accepts integer/decimal epoch seconds or ISO-8601
// (YYYY-MM-DD[Thh:mm[:ss[.fff]]][Z|+hh:mm]). Returns nullopt when unparseable.
std::optional<double> parse_timestamp(std::string_view text, bool* was_iso = nullptr);
std::string format_iso8601(std::int64_t epoch_seconds);

// Writes `timestamp,value[,flag]` using the source's column labels and
// timestamp style; missing samples are written as `missing_token`.
std::string serialize_series(const LoadSeries& s, std::span<const bool> flags = {},
                             std::string_view missing_token = "NA");

// Shortest decimal text that reads back to exactly `v`.
std::string format_double(double v);

// Sets every missing sample's value to `sentinel`; states are preserved.
LoadSeries fill_missing_defaults(const LoadSeries& s, double sentinel);

}  // namespace loadclean
