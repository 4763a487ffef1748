#pragma once

#include <span>
#include <vector>

namespace loadclean::stats {

// Order statistic at position ceil(n/2) (1-based): the lower median for even
// counts, so the result is always one of the inputs. Throws on empty input.
double lower_median(std::span<const double> values);

// lower_median(|x - center|).
double median_abs_deviation(std::span<const double> values, double center);

// Linear interpolation between order statistics ("type 7"):
// h = (n - 1) p, Q = x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h]).
// `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

double mean(std::span<const double> values);

}  // namespace loadclean::stats
