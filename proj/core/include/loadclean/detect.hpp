#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "loadclean/stationarity.hpp"

namespace loadclean {

enum class Strategy { normal, gamma, iqr };

std::string_view to_string(Strategy s);
// Throws InvalidInput on an unknown name.
Strategy parse_strategy(std::string_view name);

struct OutlierParams {
  Strategy strategy = Strategy::normal;
  double alpha = 0.05;         // normal, gamma
  double rho = 1.5;            // iqr
  double sigma_scale = 1.4826; // MAD -> sigma for normal, gamma
  // Opt-in: run the normal detector on groups where gamma is inapplicable.
  bool gamma_fallback_to_normal = false;

  // Throws InvalidInput when a parameter of the chosen strategy is out of range.
  void validate() const;
};

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;

  bool outside(double x) const noexcept { return x < lower || x > upper; }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

// Result of one detector on one dataset. `flagged` holds positions into the
// value span that was examined.
struct GroupDetection {
  Bounds bounds;
  std::vector<std::size_t> flagged;
  CharacteristicVector chars;
  std::optional<double> gamma_shape;
  std::optional<double> gamma_scale;
  bool degenerate = false;
  std::vector<std::string> warnings;
};

// theta +/- z * sigma_scale * M with z the 1 - alpha/2 normal quantile.
GroupDetection detect_normal(std::span<const double> values, double alpha, double sigma_scale);
// Gamma(shape = mu^2 / sigma^2, scale = sigma^2 / mu) with mu = theta,
// sigma = sigma_scale * M; bounds at the alpha/2 and 1 - alpha/2 quantiles.
// Throws StrategyInapplicable when theta <= 0.
GroupDetection detect_gamma(std::span<const double> values, double alpha, double sigma_scale);
// [Q1 - rho IQR, Q3 + rho IQR] with type-7 quartiles. Throws
// StrategyInapplicable with fewer than four values.
GroupDetection detect_iqr(std::span<const double> values, double rho);

GroupDetection detect_values(std::span<const double> values, const OutlierParams& params);

struct Flag {
  std::size_t index = 0;
  double value = 0.0;
  std::size_t group = 0;
  Bounds bounds;
  Strategy strategy = Strategy::normal;
};

struct GroupStats {
  std::size_t id = 0;
  std::optional<std::size_t> vld;
  std::vector<std::size_t> slots;
  std::vector<std::size_t> members;  // series indices
  double theta = 0.0;
  double mad = 0.0;
  // Mean over members that are not missing; theta when every member is.
  double mean = 0.0;
  std::optional<Bounds> bounds;      // absent when skipped
  Strategy strategy = Strategy::normal;
  std::optional<double> gamma_shape;
  std::optional<double> gamma_scale;
  bool low_power = false;
  bool skipped = false;
  std::string skip_reason;
  std::vector<std::string> warnings;
};

struct VldStats {
  std::vector<std::size_t> member_periods;
  double theta = 0.0;
  double mad = 0.0;
};

struct DetectionReport {
  OutlierParams params;
  std::size_t series_length = 0;
  std::size_t period_samples = 0;
  std::vector<Flag> flags;  // ascending index
  std::vector<GroupStats> groups;
  std::vector<VldStats> vlds;
  std::vector<std::string> warnings;

  const Flag* find(std::size_t index) const;
  std::vector<std::size_t> flagged_indices() const;
  // Group owning a series index; nullptr if none does.
  const GroupStats* owner(std::size_t index) const;
};

// Runs the chosen detector on every group. Groups where the strategy is
// inapplicable are recorded as skipped.
DetectionReport detect(const LoadSeries& s, const GroupLayout& layout, const OutlierParams& params);

}  // namespace loadclean
