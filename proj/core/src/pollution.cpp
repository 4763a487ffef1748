#include "loadclean/pollution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "loadclean/error.hpp"

namespace loadclean {

std::string_view to_string(PollutionMode m) {
  switch (m) {
    case PollutionMode::scale_spike: return "scale-spike";
    case PollutionMode::absolute_replace: return "absolute-replace";
    case PollutionMode::drop_to_zero: return "drop-to-zero";
    case PollutionMode::consecutive_gap: return "consecutive-gap";
  }
  return "scale-spike";
}

void PollutionSpec::validate(std::size_t n) const {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidInput("pollution fraction must lie in (0, 1)");
  if (std::llround(fraction * static_cast<double>(n)) < 1) {
    throw InvalidInput("pollution fraction alters no samples of a series of length " +
                       std::to_string(n));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("pollution weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("pollution weights must sum to 1");
  if (!(spike_min > 0.0 && spike_min <= spike_max)) throw InvalidInput("invalid spike range");
  if (weights[3] > 0.0) {
    if (gap_min < 1 || gap_min > gap_max) throw InvalidInput("invalid gap length range");
    if (gap_max > n) {
      throw InvalidInput("gap length range exceeds the series length " + std::to_string(n));
    }
  }
}

PollutedSeries pollute(const LoadSeries& s, const PollutionSpec& spec) {
  const std::size_t n = s.size();
  spec.validate(n);
  const auto target = static_cast<std::size_t>(std::llround(spec.fraction * static_cast<double>(n)));

  std::mt19937_64 rng(spec.rng_seed);
  std::discrete_distribution<int> pick_mode(spec.weights.begin(), spec.weights.end());
  std::uniform_int_distribution<std::size_t> pick_index(0, n - 1);
  const auto vmax = *std::max_element(s.values().begin(), s.values().end());

  std::vector<double> values(s.values().begin(), s.values().end());
  std::vector<SampleState> states(s.states().begin(), s.states().end());
  std::vector<bool> labels(n, false);
  std::vector<std::pair<std::size_t, PollutionMode>> alt;
  std::size_t altered = 0;

  auto free_index = [&]() {
    for (std::size_t attempt = 0; attempt < 64 * n; ++attempt) {
      const std::size_t i = pick_index(rng);
      if (!labels[i]) return i;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!labels[i]) return i;
    }
    throw InvalidInput("pollution: no unaltered samples left");
  };

  while (altered < target) {
    auto mode = static_cast<PollutionMode>(pick_mode(rng));
    if (mode == PollutionMode::consecutive_gap) {
      std::size_t len = std::uniform_int_distribution<std::size_t>(spec.gap_min, spec.gap_max)(rng);
      len = std::min(len, target - altered);
      std::optional<std::size_t> start;
      for (int attempt = 0; attempt < 1000 && !start; ++attempt) {
        const std::size_t b = std::uniform_int_distribution<std::size_t>(0, n - len)(rng);
        if (std::none_of(labels.begin() + static_cast<std::ptrdiff_t>(b),
                         labels.begin() + static_cast<std::ptrdiff_t>(b + len),
                         [](bool x) { return x; })) {
          start = b;
        }
      }
      if (!start) {
        len = 1;
        start = free_index();
      }
      for (std::size_t i = *start; i < *start + len; ++i) {
        values[i] = 0.0;
        states[i] = SampleState::missing;
        labels[i] = true;
        alt.emplace_back(i, mode);
      }
      altered += len;
      continue;
    }

    const std::size_t i = free_index();
    if (mode == PollutionMode::scale_spike && !(values[i] > 0.0)) mode = PollutionMode::absolute_replace;
    switch (mode) {
      case PollutionMode::scale_spike:
        values[i] *= std::uniform_real_distribution<double>(spec.spike_min, spec.spike_max)(rng);
        break;
      case PollutionMode::absolute_replace:
        values[i] = std::uniform_real_distribution<double>(0.0, 2.0 * std::max(vmax, 0.0))(rng);
        break;
      default:
        values[i] = 0.0;
        break;
    }
    states[i] = SampleState::observed;
    labels[i] = true;
    alt.emplace_back(i, mode);
    ++altered;
  }

  std::sort(alt.begin(), alt.end());
  return {s.with_values(std::move(values), std::move(states)), std::move(labels), std::move(alt)};
}

}  // namespace loadclean
