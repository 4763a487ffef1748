#pragma once

#include <span>
#include <string>
#include <vector>

namespace loadclean {

struct Metrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  // Set when a 0/0 ratio was resolved by convention.
  std::string note;
};

// Confusion counts of `flagged` (series indices) against per-sample labels.
// A 0/0 recall (nothing to find) counts as 1; a 0/0 precision (nothing
// flagged) counts as 1 only when there is also nothing to find, else 0.
// Throws InvalidInput on an out-of-range index.
Metrics score(const std::vector<bool>& labels, std::span<const std::size_t> flagged);

}  // namespace loadclean
