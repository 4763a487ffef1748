#include "loadclean/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loadclean/error.hpp"

namespace loadclean::stats {

double lower_median(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("median of an empty set");
  std::vector<double> v(values.begin(), values.end());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

double median_abs_deviation(std::span<const double> values, double center) {
  if (values.empty()) throw InvalidInput("MAD of an empty set");
  std::vector<double> dev(values.size());
  std::transform(values.begin(), values.end(), dev.begin(),
                 [center](double x) { return std::abs(x - center); });
  return lower_median(dev);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty set");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("quantile probability outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("mean of an empty set");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace loadclean::stats
