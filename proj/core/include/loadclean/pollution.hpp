#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "loadclean/series.hpp"

namespace loadclean {

enum class PollutionMode : std::uint8_t { scale_spike, absolute_replace, drop_to_zero, consecutive_gap };

std::string_view to_string(PollutionMode m);

struct PollutionSpec {
  double fraction = 0.05;
  // Weights for scale_spike, absolute_replace, drop_to_zero, consecutive_gap.
  std::array<double, 4> weights = {0.4, 0.3, 0.2, 0.1};
  std::size_t gap_min = 4;
  std::size_t gap_max = 12;
  double spike_min = 1.5;  // scale_spike multiplies by U(spike_min, spike_max)
  double spike_max = 3.0;
  std::uint64_t rng_seed = 42;

  void validate(std::size_t n) const;
};

struct PollutedSeries {
  LoadSeries series;
  std::vector<bool> labels;  // true where a sample was altered
  std::vector<std::pair<std::size_t, PollutionMode>> alterations;  // ascending index
};

// Alters exactly round(fraction * n) distinct samples:
//   scale_spike      x * U(spike_min, spike_max)
//   absolute_replace U(0, 2 * max(series))
//   drop_to_zero     0
//   consecutive_gap  a run of samples lost: value 0, marked missing
// Deterministic for a given rng_seed.
PollutedSeries pollute(const LoadSeries& s, const PollutionSpec& spec);

}  // namespace loadclean
